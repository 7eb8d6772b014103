//! `carnot-fill`: experiment driver for multiscale fillings.

mod experiment;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carnot_fill::filling::{fit_exponent, FillConfig, OffsetPolicy};
use carnot_fill::grid::CubicalGrid;
use carnot_fill::group::GroupSpec;
use carnot_fill::io::chain_from_jsonl;
use carnot_fill::oracle::OracleConfig;
use carnot_fill::{Error, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use num_rational::Ratio;

use experiment::{Context, Family};

#[derive(Parser)]
#[command(name = "carnot-fill", version, about = "Multiscale fillings of cycles in Carnot groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fill one cycle and write its report and filling chain.
    Fill {
        #[command(flatten)]
        common: Common,
        /// Family size parameter.
        #[arg(long, conflicts_with = "input")]
        size: Option<u64>,
        /// Chain file (JSON lines) holding the cycle to fill.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fill every size of a family and fit the mass exponent.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sizes as `a,b,c` or `a..b` (powers of two times `a` up to `b`).
        #[arg(long)]
        sizes: String,
    },
    /// Offset-averaging and intersection constants per size.
    Avg {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "input")]
        sizes: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Constructed mass against the exact LP filling bound.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "")]
        sizes: String,
        /// LP variable cap; larger windows are skipped.
        #[arg(long, default_value_t = 100_000)]
        var_cap: usize,
    },
    /// Log-log fit of `mass` against `V` from a series CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Preset group (H3, H5, ...).
    #[arg(long, default_value = "H3", conflicts_with = "spec")]
    group: String,
    /// GroupSpec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Family::Sphere)]
    family: Family,
    /// Cycle dimension for the random family.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale-count constant, an integer or fraction.
    #[arg(long, default_value = "1", value_parser = parse_ratio)]
    c_plan: Ratio<u64>,
    /// best | fixed | average-study
    #[arg(long, default_value = "best", value_parser = parse_policy)]
    offset_policy: OffsetPolicy,
    /// Also run the LP oracle (sweep).
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Record wall time in reports (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

fn parse_ratio(s: &str) -> std::result::Result<Ratio<u64>, String> {
    s.parse::<Ratio<u64>>()
        .map_err(|e| format!("{s:?} is not a nonnegative fraction: {e}"))
}

fn parse_policy(s: &str) -> std::result::Result<OffsetPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn usage(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

/// `a,b,c` or `a..b` (doubling from `a` while `<= b`).
fn parse_sizes(s: &str) -> std::result::Result<Vec<u64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad size {a:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad size {b:?}"))?;
        if a == 0 || a > b {
            return Err(format!("empty or invalid range {s:?}"));
        }
        let mut out = vec![a];
        while let Some(next) = out.last().unwrap().checked_mul(2).filter(|&x| x <= b) {
            out.push(next);
        }
        return Ok(out);
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad size {t:?}")))
        .collect()
}

fn sizes_or_usage(s: &str, min: usize) -> Vec<u64> {
    let sizes = parse_sizes(s).unwrap_or_else(|e| usage(e));
    if sizes.len() < min {
        usage(format!("--sizes needs at least {min} sizes, got {}", sizes.len()));
    }
    if let Some(i) = sizes.windows(2).position(|w| w[0] >= w[1]) {
        usage(format!("--sizes must increase, got {} then {}", sizes[i], sizes[i + 1]));
    }
    if sizes.contains(&0) {
        usage("sizes must be >= 1");
    }
    sizes
}

fn context(c: &Common, oracle: Option<OracleConfig>) -> Result<Context> {
    let group = match &c.spec {
        Some(path) => {
            GroupSpec::from_json(&fs::read_to_string(path).map_err(experiment::io_err(path))?)?
        }
        None => GroupSpec::preset(&c.group)?,
    };
    let grid = CubicalGrid::for_group(&group)?;
    if c.family == Family::Random && (c.dim == 0 || c.dim >= grid.dim()) {
        usage(format!("--dim must lie in 1..{} for {}", grid.dim(), group.name()));
    }
    fs::create_dir_all(&c.out).map_err(experiment::io_err(&c.out))?;
    Ok(Context {
        group,
        grid,
        family: c.family,
        dim: c.dim,
        seed: c.seed,
        fill: FillConfig {
            c_plan: c.c_plan,
            policy: c.offset_policy,
            ..FillConfig::default()
        },
        oracle: oracle.or_else(|| c.oracle.then(OracleConfig::default)),
        timing: c.timing,
    })
}

fn read_chain(ctx: &Context, path: &Path) -> Result<carnot_fill::grid::Chain> {
    let text = fs::read_to_string(path).map_err(experiment::io_err(path))?;
    chain_from_jsonl(&ctx.grid, &text, None).or_else(|e| {
        if text.trim().is_empty() {
            chain_from_jsonl(&ctx.grid, &text, Some(ctx.dim))
        } else {
            Err(e)
        }
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Fill {
            common,
            size,
            input,
        } => {
            let ctx = context(&common, None)?;
            let (label, r, alpha) = match (size, input) {
                (Some(0), _) => usage("--size must be >= 1"),
                (Some(r), None) => (ctx.family.name(), Some(r), ctx.build(r)?),
                (None, Some(path)) => ("file", None, read_chain(&ctx, &path)?),
                _ => usage("fill needs --size or --input"),
            };
            let report = experiment::fill_one(&ctx, label, r, &alpha, &common.out)?;
            println!(
                "mass {} over {} scales (planned {}), verified {}",
                report.total_mass, report.scales_used, report.plan.scales, report.verified
            );
            if !report.verified {
                eprintln!("error: filling failed verification");
            }
            Ok(report.verified)
        }
        Cmd::Sweep { common, sizes } => {
            let sizes = sizes_or_usage(&sizes, 3);
            let ctx = context(&common, None)?;
            let s = experiment::sweep(&ctx, &sizes, &common.out)?;
            println!(
                "slope {:.4} +- {:.4} (predicted {}) over {} sizes",
                s.fit.slope,
                s.fit.stderr,
                s.predicted_exponent.map_or("-".into(), |p| format!("{p:.4}")),
                s.members.len()
            );
            Ok(true)
        }
        Cmd::Avg {
            common,
            sizes,
            input,
        } => {
            let ctx = context(&common, None)?;
            let rows = match (sizes, input) {
                (Some(s), None) => experiment::avg(&ctx, &sizes_or_usage(&s, 1), &common.out)?,
                (None, Some(path)) => {
                    let alpha = read_chain(&ctx, &path)?;
                    let rows = vec![experiment::avg_row(&ctx, 0, "file", &alpha)?];
                    experiment::write_csv(
                        &common.out.join("avg.csv"),
                        &experiment::AVG_HEADER,
                        &rows,
                    )?;
                    rows
                }
                _ => usage("avg needs --sizes or --input"),
            };
            for r in rows {
                println!("r {} c_avg {:.4} c_cap {:.4}", r.r, r.c_avg, r.c_cap);
            }
            Ok(true)
        }
        Cmd::Oracle {
            common,
            sizes,
            var_cap,
        } => {
            let sizes = sizes_or_usage(&sizes, 0);
            let cfg = OracleConfig {
                var_cap,
                ..OracleConfig::default()
            };
            let ctx = context(&common, Some(cfg))?;
            for row in experiment::oracle(&ctx, &sizes, &common.out)? {
                println!(
                    "r {} constructed {} oracle {} {}",
                    row.r,
                    row.constructed,
                    row.oracle.as_deref().unwrap_or("-"),
                    row.status
                );
            }
            Ok(true)
        }
        Cmd::Fit { input, out } => {
            let series = experiment::read_series(&input)?;
            let fit = fit_exponent(&series)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&fit).map_err(|e| Error::Parse(e.to_string()))?
            );
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(experiment::io_err(&dir))?;
                experiment::write_json(&dir.join("fit.json"), &fit)?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("2,4, 8").unwrap(), vec![2, 4, 8]);
        assert_eq!(parse_sizes("4..64").unwrap(), vec![4, 8, 16, 32, 64]);
        assert_eq!(parse_sizes("3..20").unwrap(), vec![3, 6, 12]);
        assert_eq!(parse_sizes("").unwrap(), Vec::<u64>::new());
        assert!(parse_sizes("8..4").is_err());
        assert!(parse_sizes("a,b").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }
}
