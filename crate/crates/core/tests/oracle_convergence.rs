//! Observed orders of the L1 time stepper on manufactured solutions.

use fracpseudo::caputo_oracle::{
    convergence_order, l1_extrapolated, manufactured_affine, manufactured_quadratic, Reference,
};
use fracpseudo::direct::{
    solve_modal_case_ii, FractionalOrder, ModalProblem, QuadratureSpec, SourceTrace, TimeGrid,
};
use fracpseudo::mlfunc::MLAccuracy;

const STEPS: [usize; 4] = [64, 128, 256, 512];

#[test]
fn quadratic_order_at_one_half() {
    let (p, exact) = manufactured_quadratic(2.0, 3.0, 0.5).unwrap();
    let r = convergence_order(&p, 1.0, &STEPS, Reference::Exact(&exact)).unwrap();
    assert!(!r.exact);
    assert!((1.3..=1.7).contains(&r.order), "{r:?}");
    assert!(r.errors.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn quadratic_order_near_one() {
    let (p, exact) = manufactured_quadratic(1.0, 1.0, 0.9).unwrap();
    let r = convergence_order(&p, 1.0, &STEPS, Reference::Exact(&exact)).unwrap();
    assert!((0.95..=1.15).contains(&r.order), "{r:?}");
}

#[test]
fn affine_solution_is_reproduced() {
    let (p, exact) = manufactured_affine(4.0, 2.0, 0.3).unwrap();
    let r = convergence_order(&p, 2.0, &STEPS, Reference::Exact(&exact)).unwrap();
    assert!(r.exact, "{r:?}");
    assert!(r.order.is_nan());
}

#[test]
fn self_referenced_rates_track_exact_ones() {
    let (p, exact) = manufactured_quadratic(2.0, 3.0, 0.5).unwrap();
    let a = convergence_order(&p, 1.0, &STEPS, Reference::Exact(&exact)).unwrap();
    let b = convergence_order(&p, 1.0, &STEPS, Reference::Finest).unwrap();
    // the reference sits one level above the finest solve, which inflates
    // the last rate; the coarsest one is barely affected
    assert!((a.rates[0] - b.rates[0]).abs() < 0.1, "{a:?} {b:?}");
    assert!(b.rates.iter().all(|&r| r >= a.rates[0] - 0.1));
}

#[test]
fn too_few_refinements_rejected() {
    let (p, exact) = manufactured_quadratic(1.0, 1.0, 0.5).unwrap();
    assert!(convergence_order(&p, 1.0, &[64, 128], Reference::Exact(&exact)).is_err());
    assert!(convergence_order(&p, 1.0, &[64, 100, 200], Reference::Exact(&exact)).is_err());
}

#[test]
fn extrapolation_meets_closed_form() {
    // constant source: u = φE + (c/μ)(1 - E) in closed form
    let alpha = FractionalOrder::new(0.6).unwrap();
    let p = ModalProblem::new(3.0, 5.0, 0.7, SourceTrace::Constant(1.5), alpha).unwrap();
    let grid = TimeGrid::uniform(1.0, 4).unwrap();
    let closed = solve_modal_case_ii(&p, &grid, &QuadratureSpec::default(), &MLAccuracy::default()).unwrap();
    let closed = *closed.values.last().unwrap();
    let l1 = l1_extrapolated(&p, 1.0, &[256, 512, 1024, 2048]).unwrap();
    assert!((l1 - closed).abs() < 1e-6 * closed.abs(), "{l1} vs {closed}");
}
