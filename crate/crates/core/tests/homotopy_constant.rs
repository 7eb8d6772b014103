use carnot_fill::coarsen::Offset;
use carnot_fill::families::{commutator_loop, sphere_cycle};
use carnot_fill::filling::{multiscale_fill, FillConfig};
use carnot_fill::grid::{Chain, CubicalGrid};
use carnot_fill::group::GroupSpec;
use carnot_fill::homotopy::chain_homotopy_q;

fn h3() -> (GroupSpec, CubicalGrid) {
    let g = GroupSpec::preset("H3").unwrap();
    let grid = CubicalGrid::for_group(&g).unwrap();
    (g, grid)
}

/// Offset-mean of `l1(H) / l1(alpha_next)` at every scale of the best-offset
/// trajectory where no offset kills the next cycle.
fn c_q_by_scale(grid: &CubicalGrid, alpha: &Chain) -> Vec<f64> {
    let (_, report) = multiscale_fill(grid, alpha, &FillConfig::default()).unwrap();
    let mut current = alpha.clone();
    let mut out = Vec::new();
    for step in &report.steps {
        let cs: Vec<Option<f64>> = Offset::all(grid)
            .into_iter()
            .map(|o| chain_homotopy_q(grid, &current, o).unwrap().homotopy_constant())
            .collect();
        if cs.iter().all(Option::is_some) {
            out.push(cs.iter().flatten().sum::<f64>() / cs.len() as f64);
        }
        current = chain_homotopy_q(grid, &current, Offset::new(&step.offset))
            .unwrap()
            .alpha_next;
    }
    out
}

fn assert_stable(label: &str, cs: &[f64]) {
    assert!(cs.len() >= 3, "{label}: {cs:?}");
    let max = cs.iter().cloned().fold(0.0, f64::max);
    let min = cs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min < 2.0, "{label}: c_Q {cs:?}");
}

#[test]
fn sphere_homotopy_constant_is_stable() {
    let (_, grid) = h3();
    assert_stable("sphere", &c_q_by_scale(&grid, &sphere_cycle(&grid, 16).unwrap()));
}

#[test]
fn commutator_homotopy_constant_is_stable() {
    let (g, grid) = h3();
    assert_stable("commutator", &c_q_by_scale(&grid, &commutator_loop(&g, &grid, 64).unwrap()));
}

#[test]
fn last_step_dominates_for_spheres() {
    let (_, grid) = h3();
    for r in [8, 16, 32] {
        let (_, report) = multiscale_fill(&grid, &sphere_cycle(&grid, r).unwrap(), &FillConfig::default()).unwrap();
        let last = report.steps.last().unwrap().mass;
        assert!(report.steps.iter().all(|s| s.mass <= last));
        assert_eq!(report.total_mass, report.steps.iter().map(|s| s.mass).sum::<u128>());
    }
}
