use qer_core::channel::{amplitude_damping, compose_choi, is_cptp, ChoiOperator, KrausChannel};
use qer_core::linalg::ComplexMatrix;
use qer_core::random::{random_channel, random_density};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn kraus_and_choi_act_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (di, d_o, k) = (rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=5));
        let ch = random_channel(di, d_o, k, &mut rng);
        let rho = random_density(di, &mut rng);
        let a = ch.apply(&rho).unwrap();
        let b = ch.to_choi().apply(&rho).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
    }
}

#[test]
fn choi_kraus_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (di, d_o, k) = (rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=6));
        let ch = random_channel(di, d_o, k, &mut rng);
        let choi = ch.to_choi();
        let back = choi.to_kraus().unwrap();
        assert!(back.elements().len() <= di * d_o);
        assert!(back.to_choi().matrix().max_abs_diff(choi.matrix()) < 1e-10);
        let report = is_cptp(&choi, 1e-10);
        assert!(report.cp && report.tp, "{report:?}");
    }
}

#[test]
fn composed_choi_matches_sequential_application() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let (a, b, c) = (rng.random_range(1..=3), rng.random_range(1..=4), rng.random_range(1..=3));
        let e = random_channel(a, b, rng.random_range(1..=3), &mut rng);
        let r = random_channel(b, c, rng.random_range(1..=3), &mut rng);
        let composed = compose_choi(&r.to_choi(), &e).unwrap();
        let sequential = r.after(&e).unwrap().to_choi();
        assert!(composed.matrix().max_abs_diff(sequential.matrix()) < 1e-12);
        let rho = random_density(a, &mut rng);
        let direct = r.apply(&e.apply(&rho).unwrap()).unwrap();
        let via = composed.apply(&rho).unwrap();
        assert!(direct.matrix().max_abs_diff(via.matrix()) < 1e-12);
    }
}

#[test]
fn damping_choi_is_cptp_across_range() {
    for k in 0..=10 {
        let ch = amplitude_damping(k as f64 / 10.0).unwrap();
        let report = is_cptp(&ch.to_choi(), 1e-12);
        assert!(report.cp && report.tp);
        assert!(report.min_eigenvalue.unwrap() > -1e-14);
    }
}

#[test]
fn non_tp_choi_is_reported() {
    let x = ComplexMatrix::from_diag(&[1.0, 0.5, 0.5, 0.5]);
    let choi = ChoiOperator::new(2, 2, x).unwrap();
    let report = is_cptp(&choi, 1e-10);
    assert!(report.cp && !report.tp);
    let neg = ChoiOperator::new(1, 2, ComplexMatrix::from_diag(&[1.5, -0.5])).unwrap();
    let report = is_cptp(&neg, 1e-10);
    assert!(!report.cp);
}

#[test]
fn json_round_trip_of_random_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let ch = random_channel(rng.random_range(1..=4), rng.random_range(1..=4), 3, &mut rng);
        let back = KrausChannel::from_json(&ch.to_json().unwrap()).unwrap();
        assert_eq!(back, ch);
    }
    assert!(KrausChannel::from_json("{\"dim_in\":2}").is_err());
}
