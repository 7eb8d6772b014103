//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use carnot_fill::coarsen::{averaging_constant, coarsen, offset_l1_average, Offset};
use carnot_fill::families::{commutator_loop, random_chain, random_cycle, sphere_cycle};
use carnot_fill::filling::{fit_exponent, multiscale_fill, verify_filling, FillConfig, FillingReport};
use carnot_fill::grid::{Chain, CubicalGrid};
use carnot_fill::group::{GroupSpec, Point};
use carnot_fill::homotopy::{chain_homotopy_q, Homotopy};
use carnot_fill::multiscale::MultiscaleChain;
use carnot_fill::oracle::{
    intersection_constant, minimal_filling_lp, unique_top_filling, OracleConfig, WindowComplex,
};
use carnot_fill::path::{endpoint, horizontal_path};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPHERES: [u64; 5] = [2, 4, 8, 16, 32];
const LOOPS: [u64; 5] = [4, 8, 16, 32, 64];

struct Run {
    r: u64,
    alpha: Chain,
    beta: MultiscaleChain,
    report: FillingReport,
    seconds: f64,
}

struct Setup {
    h3: GroupSpec,
    grid: CubicalGrid,
    spheres: Vec<Run>,
    loops: Vec<Run>,
}

fn group(name: &str) -> (GroupSpec, CubicalGrid) {
    let g = GroupSpec::preset(name).unwrap();
    let grid = CubicalGrid::for_group(&g).unwrap();
    (g, grid)
}

fn fill(grid: &CubicalGrid, r: u64, alpha: Chain) -> Run {
    let t = Instant::now();
    let (beta, report) = multiscale_fill(grid, &alpha, &FillConfig::default())
        .unwrap_or_else(|e| panic!("fill failed at r = {r}: {e}"));
    Run {
        r,
        alpha,
        beta,
        report,
        seconds: t.elapsed().as_secs_f64(),
    }
}

fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let min = xs.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

fn slope(grid: &CubicalGrid, runs: &[Run]) -> f64 {
    let pts: Vec<(f64, f64)> = runs
        .iter()
        .map(|r| (grid.mass(&r.alpha) as f64, r.report.total_mass as f64))
        .collect();
    fit_exponent(&pts).unwrap().slope
}

fn criterion1() -> (bool, String) {
    let t = Instant::now();
    let mut checked = 0u64;
    let mut bad = 0u64;
    for name in ["H3", "H5"] {
        let (g, grid) = group(name);
        let offsets = Offset::all(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..g.dim() {
            for i in 0..500 {
                let c = if i % 2 == 0 {
                    random_cycle(&grid, d, 5, rng.gen()).unwrap()
                } else {
                    random_chain(&grid, 0, d, 5, 8, &mut rng).unwrap()
                };
                let dc = grid.boundary(&c).unwrap();
                for &o in &offsets {
                    let lhs = grid.boundary(&coarsen(&grid, &c, o).unwrap()).unwrap();
                    let rhs = coarsen(&grid, &dc, o).unwrap();
                    checked += 1;
                    bad += u64::from(lhs != rhs);
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    (
        bad == 0 && secs < 60.0,
        format!("{checked} (chain, offset) pairs on H3/H5, {bad} mismatches, {secs:.1}s"),
    )
}

fn criterion2() -> (bool, String) {
    let mut checked = 0;
    let mut bad = 0;
    for name in ["H3", "H5"] {
        let (g, grid) = group(name);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for i in 0..500 {
            let d = i % (g.dim() + 1);
            let scale = 1 + (i % 2) as u32;
            let c = random_chain(&grid, scale, d, 5, 8, &mut rng).unwrap();
            let back = coarsen(&grid, &grid.subdivide(&c).unwrap(), Offset::zero()).unwrap();
            checked += 1;
            bad += usize::from(back != c);
        }
    }
    (bad == 0, format!("{checked} coarse chains, {bad} mismatches"))
}

fn replay_bridges(grid: &CubicalGrid, run: &Run) -> bool {
    let mut current = run.alpha.clone();
    for rec in &run.report.steps {
        let Ok(step) = chain_homotopy_q(grid, &current, Offset::new(&rec.offset)) else {
            return false;
        };
        let lhs = grid.subdivide_to(&grid.boundary(&step.bridge).unwrap(), 0).unwrap();
        let next = grid.subdivide_to(&step.alpha_next, 0).unwrap();
        let prev = grid.subdivide_to(&current, 0).unwrap();
        if lhs != next.sub(&prev).unwrap() {
            return false;
        }
        current = step.alpha_next;
    }
    current.is_zero()
}

fn criterion3(s: &Setup) -> (bool, String) {
    let mut cells = 0;
    let mut bad = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for &o in &Offset::all(&s.grid) {
        let mut h = Homotopy::new(&s.grid, o);
        for d in 0..3 {
            let c = random_chain(&s.grid, 0, d, 6, 12, &mut rng).unwrap();
            for (cell, _) in c.terms() {
                cells += 1;
                bad += usize::from(!h.check_cell(cell).unwrap());
            }
        }
    }
    let bridges_ok = s
        .spheres
        .iter()
        .chain(&s.loops)
        .all(|run| replay_bridges(&s.grid, run));
    let steps: usize = s.spheres.iter().chain(&s.loops).map(|r| r.report.steps.len()).sum();
    (
        bad == 0 && bridges_ok,
        format!(
            "{cells} cells x 16 offsets with {bad} failures; {steps} bridges on spheres r<=32 and loops r<=64 {}",
            if bridges_ok { "exact" } else { "NOT exact" }
        ),
    )
}

fn criterion4(s: &Setup) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, runs) in [("sphere", &s.spheres), ("commutator", &s.loops)] {
        for run in runs.iter() {
            let verified = run.report.verified && verify_filling(&s.grid, &run.beta, &run.alpha);
            let within = run.report.scales_used <= run.report.plan.scales + 2;
            ok &= verified && within;
            detail.push(format!(
                "{label} r={} scales {}/{}{}",
                run.r,
                run.report.scales_used,
                run.report.plan.scales,
                if verified { "" } else { " UNVERIFIED" }
            ));
        }
    }
    let mut random_ok = 0;
    for seed in 0..100 {
        let (_, grid) = group(if seed % 2 == 0 { "H3" } else { "H5" });
        let z = random_cycle(&grid, 1 + seed as usize % 2, 5, seed).unwrap();
        if let Ok((beta, rep)) = multiscale_fill(&grid, &z, &FillConfig::default()) {
            if rep.verified && verify_filling(&grid, &beta, &z) {
                random_ok += 1;
            }
        }
    }
    ok &= random_ok == 100;
    let r32 = s.spheres.last().unwrap().seconds;
    ok &= r32 < 300.0;
    (
        ok,
        format!(
            "{}; random cycles {random_ok}/100 verified; sphere r=32 in {r32:.1}s",
            detail.join(", ")
        ),
    )
}

fn criterion5(s: &Setup) -> (bool, String) {
    let built = slope(&s.grid, &s.spheres);
    let mut pts = Vec::new();
    let mut exact = true;
    for run in &s.spheres {
        let w = WindowComplex::around(&run.alpha, 3, 1).unwrap();
        let b = unique_top_filling(&s.grid, &run.alpha, &w).unwrap();
        exact &= b.l1() == run.r.pow(4);
        pts.push((s.grid.mass(&run.alpha) as f64, s.grid.mass(&b) as f64));
    }
    let oracle = fit_exponent(&pts).unwrap().slope;
    let target = 4.0 / 3.0;
    (
        (built - target).abs() <= 0.15 && (oracle - target).abs() <= 0.1 && exact,
        format!(
            "constructed slope {built:.4}, oracle slope {oracle:.4} (target 4/3), oracle masses r^4 {}",
            if exact { "exact" } else { "MISMATCH" }
        ),
    )
}

fn criterion6(s: &Setup) -> (bool, String) {
    let m = slope(&s.grid, &s.loops);
    ((m - 3.0).abs() <= 0.3, format!("constructed slope {m:.4} (target 3)"))
}

fn criterion7(s: &Setup) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, runs) in [("sphere", &s.spheres), ("commutator", &s.loops)] {
        let mut avg = Vec::new();
        let mut cap = Vec::new();
        for run in runs.iter().filter(|r| [4, 8, 16, 32].contains(&r.r)) {
            let mean = offset_l1_average(&s.grid, &run.alpha);
            avg.push(averaging_constant(s.grid.weights(), &run.alpha, mean).unwrap());
            cap.push(intersection_constant(&s.grid, &run.alpha).unwrap().unwrap());
        }
        let (sa, sc) = (spread(&avg), spread(&cap));
        ok &= sa < 2.0 && sc < 2.0;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
        detail.push(format!(
            "{label} c_avg {} (x{sa:.2}), c_cap {} (x{sc:.2})",
            fmt(&avg),
            fmt(&cap)
        ));
    }
    (ok, format!("r=4..32: {}", detail.join("; ")))
}

fn criterion8(s: &Setup) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for r in 1..=3 {
        let alpha = commutator_loop(&s.h3, &s.grid, r).unwrap();
        let w = WindowComplex::around(&alpha, 3, 1).unwrap();
        let ext = w.bounds().extents();
        if ext[0] > 6 || ext[1] > 6 || ext[2] > 12 {
            ok = false;
            detail.push(format!("r={r} window {ext:?} too large"));
            continue;
        }
        let lp = minimal_filling_lp(&s.grid, &alpha, &w, &OracleConfig::default()).unwrap();
        let (_, rep) = multiscale_fill(&s.grid, &alpha, &FillConfig::default()).unwrap();
        let ratio = rep.total_mass as f64 / lp.lower_bound_f64();
        ok &= ratio <= 20.0;
        detail.push(format!(
            "r={r} window {}x{}x{} built {} LP {} ratio {ratio:.2}",
            ext[0], ext[1], ext[2], rep.total_mass, lp.lower_bound
        ));
    }
    (ok, detail.join(", "))
}

fn criterion9() -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["H3", "H5"] {
        let (g, _) = group(name);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut exact = 0;
        let mut by_decade = [0f64; 5];
        for i in 0..10_000 {
            let decade = i % 5;
            let bound = 10i64.pow(decade as u32);
            let target = Point::new((0..g.dim()).map(|_| rng.gen_range(-bound..=bound)).collect());
            let steps = horizontal_path(&g, &target).unwrap();
            if endpoint(&g, &steps).unwrap() == target {
                exact += 1;
            }
            let qn = g.quasi_norm(&target).unwrap();
            if qn > 0 {
                let c = steps.len() as f64 / qn as f64;
                by_decade[decade] = by_decade[decade].max(c);
            }
        }
        let c_path = by_decade.iter().cloned().fold(0.0, f64::max);
        ok &= exact == 10_000 && c_path <= 20.0;
        detail.push(format!(
            "{name} {exact}/10000 exact, C_path {c_path:.2} (per decade {})",
            by_decade.iter().map(|c| format!("{c:.2}")).collect::<Vec<_>>().join("/")
        ));
    }
    (ok, detail.join("; "))
}

fn main() -> ExitCode {
    let (h3, grid) = group("H3");
    let spheres = SPHERES
        .iter()
        .map(|&r| fill(&grid, r, sphere_cycle(&grid, r).unwrap()))
        .collect();
    let loops = LOOPS
        .iter()
        .map(|&r| fill(&grid, r, commutator_loop(&h3, &grid, r).unwrap()))
        .collect();
    let s = Setup {
        h3,
        grid,
        spheres,
        loops,
    };
    let results = [
        criterion1(),
        criterion2(),
        criterion3(&s),
        criterion4(&s),
        criterion5(&s),
        criterion6(&s),
        criterion7(&s),
        criterion8(&s),
        criterion9(),
    ];
    let mut all = true;
    for (i, (ok, detail)) in results.iter().enumerate() {
        all &= ok;
        println!("criterion {}: {} {detail}", i + 1, if *ok { "PASS" } else { "FAIL" });
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
