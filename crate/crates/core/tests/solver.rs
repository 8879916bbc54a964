mod common;

use common::*;
use spop::relax::assemble;
use spop::sdp::{solve, SdpStandard, SdpStatus};
use spop::{Model, SparsePop};

fn bound(pop: &SparsePop, k: u32, model: Model) -> (f64, SdpStatus) {
    let sdp = assemble(pop, k, model).unwrap();
    let std = SdpStandard::from_relaxation(&sdp);
    let t = std::time::Instant::now();
    let sol = solve(&std, 1e-9, 200).unwrap();
    eprintln!(
        "{model} k={k}: {:?} it={} bound={:.9} pobj={:.9} res={:?} {:?}",
        sol.status,
        sol.iterations,
        -sol.dual_objective,
        -sol.primal_objective,
        sol.residuals,
        t.elapsed()
    );
    (-sol.dual_objective, sol.status)
}

#[test]
fn two_disks_bound() {
    let (b, s) = bound(&two_disks(), 2, Model::SparsePutinar);
    assert!(s.is_solved());
    assert!((b + 4.0).abs() < 1e-6, "{b}");
}

#[test]
fn negative_control_bound() {
    // The moment side has no interior point here; the iteration ends on the
    // best iterate rather than at full accuracy.
    let (b, s) = bound(&cubic_cycle(), 2, Model::SparsePutinar);
    assert!(s.is_solved());
    assert!((b - 4.5).abs() < 1e-6, "{b}");
    let (b, s) = bound(&cubic_cycle(), 3, Model::SparsePutinar);
    assert!(matches!(
        s,
        SdpStatus::Optimal | SdpStatus::NearOptimal | SdpStatus::Stalled
    ));
    assert!((b - 4.5).abs() < 1e-5, "{b}");
}

#[test]
fn sextic_pair_bound() {
    let (b, s) = bound(&sextic_pair(), 3, Model::SparsePutinar);
    assert!(s.is_solved());
    assert!((b + 0.0666).abs() < 1e-3, "{b}");
}

#[test]
fn binary_bound() {
    let (b, s) = bound(&binary_chain(), 2, Model::SparsePutinar);
    assert!(s.is_solved());
    assert!((b + 1.0).abs() < 1e-5, "{b}");
}

#[test]
fn sextic_triangle_bound() {
    let (b, s) = bound(&sextic_triangle(), 3, Model::SparsePutinar);
    assert!(s.is_solved());
    assert!((b + 2.2561).abs() < 1e-3, "{b}");
}
