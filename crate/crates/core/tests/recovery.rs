use qer_core::channel::{amplitude_damping, compose_choi, tensor_power, DensityOperator};
use qer_core::codes::{five_qubit_code, leung4_code, logical_states, spreading_transform, Code, CodeIsometry};
use qer_core::fidelity::{data_matrix, entanglement_fidelity_choi};
use qer_core::random::{random_channel, random_density};
use qer_core::recovery::{
    composed_fidelity, damping_noise, damping_recovery, decode_only_recovery, fixed_recovery, optimal_recovery,
    stabilizer_qec_recovery, Method,
};
use qer_core::sdp::{solve, solve_traced, SdpProblem, SolverOptions};
use qer_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// cvxpy + Clarabel on the same problem (tests/oracles/five_qubit_sdp.py).
const FIVE_QUBIT_OPTIMAL_AT_0_1: f64 = 0.988171568614;
/// numpy evaluation of the minimum-weight syndrome decoder (same script).
const FIVE_QUBIT_QEC_AT_0_1: f64 = 0.977139138189605;

fn opts() -> SolverOptions {
    SolverOptions::with_tol(1e-9)
}

#[test]
fn five_qubit_matches_external_solver() {
    let code = Code::five_qubit().unwrap();
    let opt = damping_recovery(&code, 0.1, Method::Optimal, &opts()).unwrap();
    assert!((opt.fidelity - FIVE_QUBIT_OPTIMAL_AT_0_1).abs() < 1e-5, "{}", opt.fidelity);
    let qec = damping_recovery(&code, 0.1, Method::Qec, &opts()).unwrap();
    assert!((qec.fidelity - FIVE_QUBIT_QEC_AT_0_1).abs() < 1e-12, "{}", qec.fidelity);
    assert!(opt.fidelity >= qec.fidelity);
    let decode = damping_recovery(&code, 0.1, Method::DecodeOnly, &opts()).unwrap();
    assert!(opt.fidelity >= decode.fidelity);

    let cert = opt.certificate.as_ref().unwrap();
    assert!(cert.certificate_holds(1e-9));
    // the extracted Kraus list reproduces the SDP value
    let spread = spreading_transform(&damping_noise(&code, 0.1).unwrap(), &code.isometry).unwrap();
    let rho = DensityOperator::maximally_mixed(2);
    let f = composed_fidelity(&rho, &opt.kraus, &spread).unwrap();
    assert!((f - opt.fidelity).abs() < 1e-8);
    assert!(opt.kraus.is_trace_preserving(1e-8));
}

#[test]
fn leung_certificates_and_dominance() {
    let code = Code::leung4();
    for gamma in [0.0, 0.05, 0.2, 0.4] {
        let opt = damping_recovery(&code, gamma, Method::Optimal, &opts()).unwrap();
        let cert = opt.certificate.as_ref().unwrap();
        assert!(cert.certificate_holds(1e-9), "{gamma}: {:?}", cert.residuals);
        assert!(cert.dual_value >= cert.primal_value - 1e-9);
        assert!(opt.fidelity <= 1.0 + 1e-9);
        for m in [Method::DecodeOnly, Method::None] {
            let other = damping_recovery(&code, gamma, m, &opts()).unwrap();
            assert!(opt.fidelity >= other.fidelity - 1e-7, "{gamma} {m}");
        }
        // independent recomputation through the composed Choi matrix
        let spread = spreading_transform(&damping_noise(&code, gamma).unwrap(), &code.isometry).unwrap();
        let composed = compose_choi(&opt.recovery, &spread).unwrap();
        let f = entanglement_fidelity_choi(&DensityOperator::maximally_mixed(2), &composed).unwrap();
        assert!((f - opt.fidelity).abs() < 1e-8);
    }
}

#[test]
fn noiseless_optimum_is_perfect() {
    let code = Code::leung4();
    let opt = damping_recovery(&code, 0.0, Method::Optimal, &opts()).unwrap();
    assert!((opt.fidelity - 1.0).abs() < 1e-8);
}

#[test]
fn objective_equals_composed_fidelity_for_any_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let codes: Vec<CodeIsometry> = vec![logical_states(&five_qubit_code()).unwrap(), leung4_code()];
    for enc in codes {
        let n = enc.dim_code().trailing_zeros() as usize;
        let spread = spreading_transform(&tensor_power(&amplitude_damping(0.15).unwrap(), n).unwrap(), &enc).unwrap();
        for _ in 0..10 {
            let rho = random_density(2, &mut rng);
            let c = data_matrix(&rho, &spread).unwrap();
            let r = random_channel(enc.dim_code(), 2, 3, &mut rng);
            let objective = r.to_choi().matrix().trace_product(&c);
            let direct = composed_fidelity(&rho, &r, &spread).unwrap();
            assert!((objective.re - direct).abs() < 1e-10);
            assert!(objective.im.abs() < 1e-10);
        }
    }
}

#[test]
fn logical_phases_do_not_change_optimum() {
    let code = Code::leung4();
    let noise = damping_noise(&code, 0.2).unwrap();
    let base = optimal_recovery(&code.isometry, &noise, None, &opts()).unwrap();
    let rephased = code.isometry.rephased(&[0.7, -2.1]).unwrap();
    let other = optimal_recovery(&rephased, &noise, None, &opts()).unwrap();
    assert!((base.fidelity - other.fidelity).abs() < 1e-8);
}

#[test]
fn pure_source_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let code = Code::leung4();
    let noise = damping_noise(&code, 0.2).unwrap();
    let rho = qer_core::random::random_density_with_rank(2, 1, &mut rng);
    let opt = optimal_recovery(&code.isometry, &noise, Some(&rho), &opts()).unwrap();
    let decode = decode_only_recovery(&code.isometry).unwrap();
    let fixed = fixed_recovery(&code.isometry, &noise, Some(&rho), decode, Method::DecodeOnly).unwrap();
    assert!(opt.fidelity >= fixed.fidelity - 1e-8);
    assert!(opt.fidelity <= 1.0 + 1e-9);
    let wrong = DensityOperator::maximally_mixed(3);
    assert!(optimal_recovery(&code.isometry, &noise, Some(&wrong), &opts()).is_err());
}

#[test]
fn barrier_and_gap_decrease() {
    let code = Code::leung4();
    for gamma in [0.05, 0.3] {
        let opt = damping_recovery(&code, gamma, Method::Optimal, &opts()).unwrap();
        let h = &opt.certificate.as_ref().unwrap().history;
        assert!(h.len() >= 2);
        for w in h.windows(2) {
            assert!(w[1].mu <= w[0].mu * (1.0 + 1e-12), "{} -> {}", w[0].mu, w[1].mu);
            assert!(w[1].gap <= w[0].gap * (1.0 + 1e-12) + 1e-14, "{} -> {}", w[0].gap, w[1].gap);
        }
    }
}

#[test]
fn trace_has_one_line_per_iteration() {
    let code = Code::leung4();
    let spread = spreading_transform(&damping_noise(&code, 0.1).unwrap(), &code.isometry).unwrap();
    let c = data_matrix(&DensityOperator::maximally_mixed(2), &spread).unwrap();
    let problem = SdpProblem::new(2, 16, c).unwrap();
    let mut buf = Vec::new();
    let traced = solve_traced(&problem, &opts(), &mut buf).unwrap();
    let plain = solve(&problem, &opts()).unwrap();
    assert_eq!(traced.primal_value, plain.primal_value);
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), traced.history.len());
    assert!(text.lines().all(|l| l.contains("gap=")));
}

#[test]
fn iteration_cap_reports_best_iterate() {
    let code = Code::leung4();
    let spread = spreading_transform(&damping_noise(&code, 0.1).unwrap(), &code.isometry).unwrap();
    let c = data_matrix(&DensityOperator::maximally_mixed(2), &spread).unwrap();
    let problem = SdpProblem::new(2, 16, c).unwrap();
    let capped = SolverOptions { tol: 1e-9, max_iterations: 3 };
    match solve(&problem, &capped) {
        Err(Error::NotConverged { best }) => {
            assert!(best.iterations <= 3);
            assert!(best.gap > 0.0);
            assert!(best.x.tp_residual() < 1e-8);
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn syndrome_recovery_matches_decoder_on_single_errors() {
    // every weight-one Pauli on an encoded state is undone exactly
    let code = five_qubit_code();
    let enc = logical_states(&code).unwrap();
    let r = stabilizer_qec_recovery(&code, &enc).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let rho = random_density(2, &mut rng);
    for w in 0..=1 {
        for p in qer_core::codes::PauliString::of_weight(5, w) {
            let corrupted = p.matrix().conjugate(&enc.encode(rho.matrix()));
            let out = r.apply_matrix(&corrupted).unwrap();
            assert!(out.max_abs_diff(rho.matrix()) < 1e-12, "{p}");
        }
    }
}
