mod common;

use common::*;
use proptest::prelude::*;
use spop::certify::*;
use spop::relax::assemble;
use spop::sdp::{solve, SdpSolution, SdpStandard};
use spop::{Model, Polynomial, SdpProblem, SparsePop, SparsityPattern};

fn solved(pop: &SparsePop, k: u32, model: Model) -> (SdpProblem, SdpSolution) {
    let sdp = assemble(pop, k, model).unwrap();
    let sol = solve(&SdpStandard::from_relaxation(&sdp), 1e-9, 200).unwrap();
    (sdp, sol)
}

fn certificate(pop: &SparsePop, k: u32) -> TightnessCertificate {
    let (sdp, sol) = solved(pop, k, Model::SparsePutinar);
    let cert = split_representation(&sdp, &sol, -sol.dual_objective).unwrap();
    eprintln!(
        "k={k} gamma={:.8} identity={:.2e} membership={:?}",
        cert.gamma, cert.identity_residual, cert.membership_residuals
    );
    cert
}

#[test]
fn two_disks_certificate() {
    let pop = two_disks();
    let cert = certificate(&pop, 2);
    assert!((cert.gamma + 4.0).abs() < 1e-5);
    let s = 0.5f64.sqrt();
    let mins = vec![vec![s, -s, s], vec![-s, s, -s]];
    let rep = verify_certificate(&cert, &pop, &mins, 1e-5);
    assert!(rep.passed, "{:?}", rep.problems);
    assert!(rep.identity_residual <= 1e-5);
    assert!(rep.membership_residuals.iter().all(|&r| r <= 1e-5));
    assert!(rep.common_zero.iter().all(|&v| v < 1e-3), "{:?}", rep.common_zero);
    // p_i depends on the shared variable only, up to roundoff
    for b in &cert.blocks {
        for t in b.p.to_terms() {
            assert!(t.e.supported_in(&[2]) || t.c.abs() < 1e-6, "{t:?}");
        }
    }
}

#[test]
fn tight_examples_verify() {
    for (pop, k) in [(sextic_pair(), 3), (binary_chain(), 2), (sextic_triangle(), 3)] {
        let cert = certificate(&pop, k);
        let rep = verify_certificate(&cert, &pop, &[], 1e-5);
        assert!(rep.passed, "{:?}", rep.problems);
    }
}

#[test]
fn single_block_p_is_minus_gamma() {
    let pop = two_disks().densify();
    let (sdp, sol) = solved(&pop, 2, Model::SparsePutinar);
    let cert = split_representation(&sdp, &sol, -sol.dual_objective).unwrap();
    assert_eq!(cert.blocks.len(), 1);
    let diff = cert.blocks[0].p.add(&Polynomial::constant(3, cert.gamma));
    assert!(diff.max_abs_coeff() < 1e-6, "{}", diff.max_abs_coeff());
    assert!(verify_certificate(&cert, &pop, &[], 1e-5).passed);
}

#[test]
fn tampering_is_rejected() {
    let pop = two_disks();
    let cert = certificate(&pop, 2);
    let mut shifted = cert.clone();
    shifted.blocks[0].p = shifted.blocks[0].p.add(&Polynomial::constant(3, 1.0));
    let rep = verify_certificate(&shifted, &pop, &[], 1e-5);
    assert!(!rep.passed);
    assert!((rep.identity_residual - 1.0).abs() < 1e-5);

    // perturb one Gram entry of each term in turn
    for b in 0..cert.blocks.len() {
        for g in 0..cert.blocks[b].grams.len() {
            let mut bad = cert.clone();
            let term = &mut bad.blocks[b].grams[g];
            let idx = term.gram.len() - 1;
            term.gram[idx] += 1e-3;
            assert!(!verify_certificate(&bad, &pop, &[], 1e-5).passed, "block {b} gram {g}");
        }
    }
}

#[test]
fn epsilon_certificates_are_labeled() {
    let pop = two_disks();
    let cert = certificate(&pop, 2);
    let eps = epsilon_certificate(&cert, &pop, cert.gamma, 1e-4).unwrap();
    let rep = verify_certificate(&eps, &pop, &[], 1e-5);
    assert!(rep.passed, "{:?}", rep.problems);
    assert_eq!(rep.epsilon, Some(1e-4));
    // a target above the bound needs enough slack
    assert!(epsilon_certificate(&cert, &pop, cert.gamma + 1.0, 1e-4).is_err());
    let far = epsilon_certificate(&cert, &pop, cert.gamma + 1.0, 0.5).unwrap();
    assert!(verify_certificate(&far, &pop, &[], 1e-5).passed);
}

#[test]
fn split_box_sum_dense_membership() {
    let pop = split_box();
    let f = pop.objective();
    let q = f.sub(&Polynomial::constant(3, 1.0));
    let m = check_membership(&q, &[1, 2, 3], &[], &[], 2, Cone::Qmodule).unwrap();
    assert!(m.is_member(), "{m:?}");

    // the sparse certificate at the true minimum cannot exist
    let (sdp, sol) = solved(&pop, 2, Model::SparsePutinar);
    let bound = -sol.dual_objective;
    assert!(bound < 1.0 - 1e-3, "{bound}");
    let cert = split_representation(&sdp, &sol, bound).unwrap();
    let lifted = TightnessCertificate { gamma: 1.0, ..cert };
    assert!(!verify_certificate(&lifted, &pop, &[], 1e-5).passed);
}

#[test]
fn overlap_contradiction_is_certified() {
    let n = 3;
    let pattern = SparsityPattern::new(n, vec![vec![1, 2], vec![1, 3]]).unwrap();
    let pop = SparsePop::new(
        pattern,
        vec![Polynomial::zero(n); 2],
        vec![vec![poly(n, "x1")], vec![poly(n, "x1 - 1")]],
        vec![vec![], vec![]],
    )
    .unwrap();
    let out = sparse_infeasibility(&pop, 1).unwrap();
    let InfeasibilityOutcome::Found { certificate } = out else {
        panic!("{out:?}")
    };
    let rep = verify_infeasibility(&certificate, &pop, 1e-6);
    assert!(rep.passed, "{:?}", rep.problems);
    assert!(certificate.blocks.iter().all(|b| b.p.support_check(&[1])));
}

#[test]
fn feasible_examples_have_no_infeasibility_certificate() {
    for k in 1..=2 {
        assert_eq!(
            sparse_infeasibility(&two_disks(), k).unwrap(),
            InfeasibilityOutcome::NotFound
        );
    }
}

fn linear_form() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// Accepted at order 1 implies accepted at order 2. The constant keeps
    /// the SOS side away from the boundary of the cone.
    #[test]
    fn membership_nests(forms in prop::collection::vec(linear_form(), 1..4), c in 0.1f64..1.0) {
        let n = 2;
        let mut q = Polynomial::constant(n, c);
        for f in &forms {
            let l = Polynomial::parse(n, &format!("{} + {}*x1 + {}*x2", f[0], f[1], f[2])).unwrap();
            q = q.add(&l.mul(&l));
        }
        let m1 = check_membership(&q, &[1, 2], &[], &[], 1, Cone::Qmodule).unwrap();
        prop_assume!(m1.is_member());
        let m2 = check_membership(&q, &[1, 2], &[], &[], 2, Cone::Qmodule).unwrap();
        prop_assert!(m2.is_member(), "{:?}", m2);
    }
}
