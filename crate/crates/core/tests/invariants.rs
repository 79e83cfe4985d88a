use mems_core::channels::{mems1_map, mems2_map, FamilyTag, KrausMap};
use mems_core::linalg::{hermitian_eigenvalues, sigma_y, tensor, CMatrix, DensityMatrix, TOL};
use mems_core::mems::{classify, concurrence, mems1_state, mems2_state, mems_state, singlet};
use mems_core::optics::{alpha_for_p, detected_from_density, detected_two_photon};
use mems_core::qed::{
    apply_attenuator, apply_bs, apply_pbs, apply_rotator, initial_singlet_fock,
    normalized_mems_from_qed, p_of_t, reduced_matrices, run_pipeline, truncated_states,
    Transmissivity,
};
use mems_core::random::{hilbert_schmidt_state, random_pure_state, random_unitary, stream_rng};
use proptest::prelude::*;

fn p1() -> impl Strategy<Value = f64> {
    (2.0 / 3.0)..=1.0
}

fn p2() -> impl Strategy<Value = f64> {
    0.0..=(2.0 / 3.0)
}

fn family_and_p() -> impl Strategy<Value = (FamilyTag, f64)> {
    prop_oneof![
        p1().prop_map(|p| (FamilyTag::I, p)),
        p2().prop_map(|p| (FamilyTag::II, p))
    ]
}

proptest! {
    #[test]
    fn lifted_maps_keep_singlet_trace((tag, p) in family_and_p()) {
        let out = tag.kraus_map(p).unwrap().lift_first_qubit().unwrap().apply(&singlet()).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.distance(&mems_state(tag, p).unwrap()) < 1e-12);
    }

    #[test]
    fn kraus_sum_equals_transpose_sum((tag, p) in family_and_p()) {
        let m = tag.kraus_map(p).unwrap();
        prop_assert!(m.kraus_sum().approx_eq(&m.kraus_transpose_sum(), 1e-14));
    }

    #[test]
    fn apply_preserves_positivity((tag, p) in family_and_p(), seed in any::<u64>()) {
        let map = tag.kraus_map(p).unwrap();
        let rho = hilbert_schmidt_state(2, &mut stream_rng(seed, 0));
        let out = map.apply(&rho).unwrap();
        prop_assert!(hermitian_eigenvalues(out.matrix()).unwrap().iter().all(|&e| e >= -TOL));
        let lifted = map.lift_first_qubit().unwrap();
        let rho4 = hilbert_schmidt_state(4, &mut stream_rng(seed, 1));
        let out4 = lifted.apply(&rho4).unwrap();
        prop_assert!(hermitian_eigenvalues(out4.matrix()).unwrap().iter().all(|&e| e >= -TOL));
    }

    #[test]
    fn concurrence_equals_p((tag, p) in family_and_p()) {
        let c = concurrence(&mems_state(tag, p).unwrap()).unwrap();
        prop_assert!((c - p).abs() < 1e-9, "C = {c}, p = {p}");
    }

    #[test]
    fn optics_trace_bounds(p in (2.0 / 3.0)..0.999, seed in any::<u64>()) {
        let rho = random_pure_state(2, &mut stream_rng(seed, 0));
        let j = detected_from_density(&rho, alpha_for_p(p).unwrap()).unwrap();
        prop_assert!(j.trace() >= 0.5 - 1e-12 && j.trace() <= 1.0 + 1e-12);
    }

    #[test]
    fn qed_norm_conserved_at_each_element(t in 0.0..=1.0f64) {
        let tr = Transmissivity::new(t).unwrap();
        let s0 = initial_singlet_fock();
        let s1 = apply_bs(&s0);
        let s2 = apply_rotator(&s1);
        let s3 = apply_pbs(&s2);
        let s4 = apply_attenuator(&s3, tr);
        for s in [s1, s2, s3, s4] {
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        prop_assert!((tr.t() * tr.t() + tr.r() * tr.r() - 1.0).abs() < 1e-15);
    }
}

/// A map is trace preserving exactly when it preserves the trace of random inputs.
#[test]
fn trace_preservation_matches_kraus_sum() {
    let unitary = KrausMap::new("sigma_y", vec![sigma_y()]).unwrap();
    let maps = [
        unitary,
        KrausMap::identity(2),
        mems1_map(0.8).unwrap(),
        mems2_map(0.3).unwrap(),
    ];
    for map in maps {
        let tp = map.audit().unwrap().kraus_sum_defect < TOL;
        let preserves = (0..50).all(|i| {
            let rho = hilbert_schmidt_state(2, &mut stream_rng(9, i));
            (map.apply(&rho).unwrap().trace() - 1.0).abs() < 10.0 * TOL
        });
        assert_eq!(tp, preserves, "{}", map.label());
    }
}

#[test]
fn families_meet_on_the_boundary() {
    let d = mems1_state(2.0 / 3.0)
        .unwrap()
        .distance(&mems2_state(2.0 / 3.0).unwrap());
    assert_eq!(d, 0.0);
}

#[test]
fn classify_round_trips_on_fine_grid() {
    for k in 0..=100 {
        let p = 2.0 / 3.0 + (1.0 / 3.0) * k as f64 / 100.0;
        let found = classify(&mems1_state(p).unwrap(), 1e-9).unwrap().unwrap();
        assert_eq!(found.tag, FamilyTag::I);
        assert!((found.p - p).abs() < 1e-12);
    }
    for k in 0..=66 {
        let p = (k as f64 * 0.01).min(2.0 / 3.0);
        let found = classify(&mems2_state(p).unwrap(), 1e-9).unwrap().unwrap();
        let expect = if (p - 2.0 / 3.0).abs() < 1e-15 {
            FamilyTag::I
        } else {
            FamilyTag::II
        };
        assert_eq!(found.tag, expect, "p = {p}");
        assert!((found.p - p).abs() < 1e-12);
    }
}

#[test]
fn concurrence_invariant_under_local_unitaries() {
    for i in 0..100 {
        let mut rng = stream_rng(21, i);
        let rho = hilbert_schmidt_state(4, &mut rng);
        let u = tensor(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        let rotated = DensityMatrix::new(&(&u * rho.matrix()) * &u.adjoint()).unwrap();
        let a = concurrence(&rho).unwrap();
        let b = concurrence(&rotated).unwrap();
        assert!((a - b).abs() < 1e-9, "trial {i}: {a} vs {b}");
    }
}

#[test]
fn qed_transmissivity_grid() {
    for k in 0..=20 {
        let t = k as f64 * 0.05;
        let tr = Transmissivity::new(t).unwrap();
        let ts = truncated_states(tr);
        assert!((ts.total.trace() - 1.0).abs() < 1e-12);
        assert!((ts.rho12.trace() + ts.rho34.trace() - 1.0).abs() < 1e-12);
        assert!((ts.rho12.matrix() + ts.rho34.matrix()).approx_eq(ts.total.matrix(), 1e-12));
        // Truncation always loses at least a quarter of the probability.
        let deficit = 1.0 - ts.rho12.trace();
        assert!((deficit - 0.5 * (1.0 - t * t / 2.0)).abs() < 1e-12);
        assert!(deficit >= 0.25 - 1e-12);
        let red = reduced_matrices(tr).unwrap();
        let half = CMatrix::identity(2).scale_real(0.5);
        assert!(red.sum_trace_a().approx_eq(&half, 1e-12));
        assert!(red.sum_trace_b().approx_eq(&half, 1e-12));
    }
}

#[test]
fn three_models_agree() {
    for k in 1..=20 {
        let t = k as f64 * 0.05;
        let tr = Transmissivity::new(t).unwrap();
        let p = p_of_t(tr);
        let qed = normalized_mems_from_qed(tr).unwrap();
        let closed = mems1_state(p).unwrap();
        assert!(qed.distance(&closed) < 1e-12, "T = {t}");
        let att = alpha_for_p(p).unwrap();
        // e^{-2 alpha} = T^2
        assert!((att.amplitude().powi(2) - t * t).abs() < 1e-12, "T = {t}");
        let optics = detected_two_photon(&singlet(), att)
            .unwrap()
            .normalized()
            .unwrap();
        assert!(optics.distance(&closed) < 1e-12, "T = {t}");
    }
    assert_eq!(
        run_pipeline(Transmissivity::new(0.0).unwrap())
            .output
            .amplitude(2, 0, 1),
        mems_core::linalg::ZERO
    );
}
