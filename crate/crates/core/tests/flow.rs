mod common;

use bo_birkhoff::counterexample::CounterexampleParams;
use bo_birkhoff::flow::{
    evolve_birkhoff_trajectory, evolve_direct_samples, observable_grid, BirkhoffFlowOptions,
};
use bo_birkhoff::{evolve_birkhoff, make_potential, PotentialFamily};
use common::*;

#[test]
fn small_q_first_mode_agrees_with_direct() {
    let p = CounterexampleParams::new(0.3, 0.5).unwrap();
    let n = p.decay_rule_m();
    let u0 = p.potential(n).unwrap();
    let times = observable_grid(1.0, 0.0, 0.5).unwrap();
    let traj = evolve_birkhoff_trajectory(&u0, &times, &BirkhoffFlowOptions::new(2 * n)).unwrap();
    assert!(traj.truncated_at.is_none());
    let grid = (4 * n).next_power_of_two().max(128);
    let direct = evolve_direct_samples(&u0, &times, 1e-4, grid).unwrap();
    let worst = traj
        .states
        .iter()
        .zip(&direct)
        .map(|(b, d)| (b.coeff(1) - d.coeff(1)).norm())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "first-mode disagreement {worst:e}");
}

#[test]
fn negative_time_inverts_forward_time() {
    let u0 = make_potential(&PotentialFamily::Random { seed: 3, decay: 2.0, scale: 0.1 }, 6).unwrap();
    let there = evolve_birkhoff(&u0, 0.3, 48).unwrap();
    let back = evolve_birkhoff(&there, -0.3, 48).unwrap();
    assert!(phase_norm(&back.difference(&u0)) < 1e-8);
}
