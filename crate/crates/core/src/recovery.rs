//! End-to-end recovery pipelines for a code under amplitude damping, and the
//! small-γ expansion fit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{amplitude_damping, tensor_power, ChoiOperator, DensityOperator, KrausChannel};
use crate::codes::{spreading_transform, Code, CodeIsometry, PauliString, StabilizerCode};
use crate::error::{Error, Result};
use crate::fidelity::{data_matrix, entanglement_fidelity_kraus};
use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::sdp::{solve, SdpProblem, SdpSolution, SolverOptions};

/// Quadratic coefficient quoted in the literature for the γ-dependent
/// recovery circuit of the four-qubit code, `F ≈ 1 − 2.75 γ²`. It is a
/// reference constant only; that circuit is not built here.
pub const LEUNG_LITERATURE_COEFFICIENT: f64 = 2.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Optimal,
    Qec,
    None,
    DecodeOnly,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Optimal => "optimal",
            Method::Qec => "qec",
            Method::None => "none",
            Method::DecodeOnly => "decode-only",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "optimal" => Ok(Method::Optimal),
            "qec" => Ok(Method::Qec),
            "none" => Ok(Method::None),
            "decode-only" => Ok(Method::DecodeOnly),
            other => Err(Error::InvalidParameter(format!("unknown recovery method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// Recovery channel from the code space back to the source space.
    pub recovery: ChoiOperator,
    pub kraus: KrausChannel,
    pub fidelity: f64,
    pub gamma: Option<f64>,
    pub method: Method,
    pub certificate: Option<SdpSolution>,
}

/// Optimal recovery for `rho_source` (maximally mixed when `None`) sent
/// through `noise ∘ enc`.
pub fn optimal_recovery(
    enc: &CodeIsometry,
    noise: &KrausChannel,
    rho_source: Option<&DensityOperator>,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    let default_rho;
    let rho = match rho_source {
        Some(r) => r,
        None => {
            default_rho = DensityOperator::maximally_mixed(enc.dim_source());
            &default_rho
        }
    };
    if rho.dim() != enc.dim_source() {
        return Err(Error::dims(enc.dim_source(), rho.dim()));
    }
    let spread = spreading_transform(noise, enc)?;
    let cost = data_matrix(rho, &spread)?;
    let problem = SdpProblem::new(enc.dim_source(), enc.dim_code(), cost)?;
    let solution = solve(&problem, opts)?;
    let kraus = solution.x.to_kraus()?;
    Ok(RecoveryResult {
        recovery: solution.x.clone(),
        kraus,
        fidelity: solution.primal_value,
        gamma: None,
        method: Method::Optimal,
        certificate: Some(solution),
    })
}

/// Syndrome-measurement recovery: project onto each syndrome space, apply the
/// unique minimum-weight Pauli with that syndrome, then decode.
/// Elements are `U_C† C_s P_s`, one per syndrome.
pub fn stabilizer_qec_recovery(code: &StabilizerCode, enc: &CodeIsometry) -> Result<KrausChannel> {
    let n = code.n();
    if enc.dim_code() != 1 << n {
        return Err(Error::dims(1usize << n, enc.dim_code()));
    }
    let r = code.generators().len();
    let n_syndromes = 1usize << r;
    let mut table: Vec<Option<PauliString>> = vec![None; n_syndromes];
    let index = |s: &[i8]| s.iter().fold(0usize, |acc, &v| (acc << 1) | usize::from(v < 0));
    let mut filled = 0;
    for weight in 0..=n {
        let mut this_weight: Vec<Option<PauliString>> = vec![None; n_syndromes];
        for p in PauliString::of_weight(n, weight) {
            let s = code.syndrome(&p);
            let idx = index(&s);
            if table[idx].is_some() {
                continue;
            }
            if let Some(first) = &this_weight[idx] {
                return Err(Error::AmbiguousSyndrome {
                    syndrome: s,
                    first: first.to_string(),
                    second: p.to_string(),
                });
            }
            this_weight[idx] = Some(p);
        }
        for (slot, found) in table.iter_mut().zip(this_weight) {
            if slot.is_none() && found.is_some() {
                *slot = found;
                filled += 1;
            }
        }
        if filled == n_syndromes {
            break;
        }
    }
    let decoder = enc.matrix().adjoint();
    let mut elements = Vec::with_capacity(n_syndromes);
    for (idx, correction) in table.iter().enumerate() {
        let syndrome: Vec<i8> = (0..r)
            .map(|g| if idx >> (r - 1 - g) & 1 == 1 { -1 } else { 1 })
            .collect();
        let correction = correction
            .as_ref()
            .ok_or_else(|| Error::MissingSyndrome(syndrome.clone()))?;
        let projector = code.syndrome_projector(&syndrome);
        elements.push(&(&decoder * &correction.matrix()) * &projector);
    }
    KrausChannel::new(elements)
}

/// Decodes with `U_C†` on the code space and resets everything orthogonal to
/// it to `|0⟩`.
pub fn decode_only_recovery(enc: &CodeIsometry) -> Result<KrausChannel> {
    let d_k = enc.dim_code();
    let complement = &ComplexMatrix::identity(d_k) - &enc.projector();
    let eig = eig_hermitian(&complement.hermitian_part())?;
    let mut elements = vec![enc.matrix().adjoint()];
    for (k, &l) in eig.values.iter().enumerate() {
        if l < 0.5 {
            break;
        }
        let v = eig.vectors.column(k);
        let mut e = ComplexMatrix::zeros(enc.dim_source(), d_k);
        for (j, vj) in v.iter().enumerate() {
            e[(0, j)] = vj.conj();
        }
        elements.push(e);
    }
    KrausChannel::new(elements)
}

/// `F(ρ, ℛ∘ℰ') = Σ_{i,j} |tr(ρ R_i E'_j)|²` without forming the composite.
pub fn composed_fidelity(rho: &DensityOperator, recovery: &KrausChannel, spread: &KrausChannel) -> Result<f64> {
    if recovery.dim_in() != spread.dim_out() {
        return Err(Error::dims(spread.dim_out(), recovery.dim_in()));
    }
    if recovery.dim_out() != rho.dim() || spread.dim_in() != rho.dim() {
        return Err(Error::dims(rho.dim(), recovery.dim_out()));
    }
    let mut total = 0.0;
    for e in spread.elements() {
        // tr(ρ R E) = tr((E ρ) R)
        let e_rho = e * rho.matrix();
        for r in recovery.elements() {
            total += e_rho.trace_product(r).norm_sqr();
        }
    }
    Ok(total)
}

/// Result for a fixed (non-optimized) recovery channel.
pub fn fixed_recovery(
    enc: &CodeIsometry,
    noise: &KrausChannel,
    rho_source: Option<&DensityOperator>,
    recovery: KrausChannel,
    method: Method,
) -> Result<RecoveryResult> {
    let rho = rho_source
        .cloned()
        .unwrap_or_else(|| DensityOperator::maximally_mixed(enc.dim_source()));
    let spread = spreading_transform(noise, enc)?;
    let fidelity = composed_fidelity(&rho, &recovery, &spread)?;
    Ok(RecoveryResult {
        recovery: recovery.to_choi(),
        kraus: recovery,
        fidelity,
        gamma: None,
        method,
        certificate: None,
    })
}

/// Entanglement fidelity of an unencoded qubit through one damping channel,
/// `((1 + √(1−γ))/2)²`.
pub fn no_recovery_baseline(gamma: f64) -> Result<f64> {
    entanglement_fidelity_kraus(&DensityOperator::maximally_mixed(2), &amplitude_damping(gamma)?)
}

/// Independent amplitude damping on every physical qubit of `code`.
pub fn damping_noise(code: &Code, gamma: f64) -> Result<KrausChannel> {
    tensor_power(&amplitude_damping(gamma)?, code.n_qubits()?)
}

/// Evaluates one recovery method for `code` under damping `gamma`, with the
/// maximally mixed source state.
pub fn damping_recovery(code: &Code, gamma: f64, method: Method, opts: &SolverOptions) -> Result<RecoveryResult> {
    let mut result = match method {
        Method::None => {
            let fidelity = no_recovery_baseline(gamma)?;
            let id = KrausChannel::identity(2);
            RecoveryResult {
                recovery: id.to_choi(),
                kraus: id,
                fidelity,
                gamma: None,
                method,
                certificate: None,
            }
        }
        Method::Optimal => optimal_recovery(&code.isometry, &damping_noise(code, gamma)?, None, opts)?,
        Method::Qec => {
            let stab = code.stabilizer.as_ref().ok_or_else(|| {
                Error::InvalidParameter("syndrome recovery needs stabilizer generators".into())
            })?;
            let r = stabilizer_qec_recovery(stab, &code.isometry)?;
            fixed_recovery(&code.isometry, &damping_noise(code, gamma)?, None, r, method)?
        }
        Method::DecodeOnly => {
            let r = decode_only_recovery(&code.isometry)?;
            fixed_recovery(&code.isometry, &damping_noise(code, gamma)?, None, r, method)?
        }
    };
    result.gamma = Some(gamma);
    Ok(result)
}

/// Least-squares fit of `1 − F` on `{γ², γ³}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub quadratic: f64,
    pub cubic: f64,
    pub residual_norm: f64,
}

/// Largest γ accepted by [`fit_quadratic_coefficient`].
pub const FIT_MAX_GAMMA: f64 = 0.02;

pub fn fit_quadratic_coefficient(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    if points.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some((g, _)) = points.iter().find(|(g, _)| !(*g > 0.0 && *g <= FIT_MAX_GAMMA)) {
        return Err(Error::InvalidParameter(format!(
            "gamma {g} outside (0, {FIT_MAX_GAMMA}]"
        )));
    }
    // scale γ to O(1) so the normal equations are well conditioned
    let scale = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let (mut s44, mut s45, mut s55, mut b4, mut b5) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(g, f) in points {
        let t = g / scale;
        let (u, v) = (t * t, t * t * t);
        let d = 1.0 - f;
        s44 += u * u;
        s45 += u * v;
        s55 += v * v;
        b4 += u * d;
        b5 += v * d;
    }
    let det = s44 * s55 - s45 * s45;
    if det.abs() <= 1e-12 * s44 * s55 {
        return Err(Error::DegenerateFit);
    }
    let a = (b4 * s55 - b5 * s45) / det;
    let b = (s44 * b5 - s45 * b4) / det;
    let residual_norm = points
        .iter()
        .map(|&(g, f)| {
            let t = g / scale;
            (1.0 - f - a * t * t - b * t * t * t).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Ok(QuadraticFit {
        quadratic: a / (scale * scale),
        cubic: b / (scale * scale * scale),
        residual_norm,
    })
}

/// Eight log-spaced points on `[1e-3, 1e-2]`.
pub fn fit_grid() -> Vec<f64> {
    (0..8).map(|k| 10f64.powf(-3.0 + k as f64 / 7.0)).collect()
}

/// Gap tolerance for a fit point: the infidelity there is of order γ², so the
/// solver must resolve well below that.
pub fn fit_tolerance(gamma: f64, base: f64) -> f64 {
    base.min(1e-4 * gamma * gamma)
}

/// Fits the small-γ coefficient of `method` on [`fit_grid`].
pub fn small_gamma_coefficient(code: &Code, method: Method, base_tol: f64) -> Result<(QuadraticFit, Vec<(f64, f64)>)> {
    let mut points = Vec::new();
    for g in fit_grid() {
        let opts = SolverOptions::with_tol(fit_tolerance(g, base_tol));
        points.push((g, damping_recovery(code, g, method, &opts)?.fidelity));
    }
    Ok((fit_quadratic_coefficient(&points)?, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{five_qubit_code, leung4_code, logical_states};
    use crate::linalg::{C64, ONE};

    #[test]
    fn baseline_values() {
        assert!((no_recovery_baseline(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((no_recovery_baseline(0.36).unwrap() - 0.81).abs() < 1e-14);
        assert!((no_recovery_baseline(1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(no_recovery_baseline(1.5).is_err());
    }

    #[test]
    fn fit_recovers_exact_model() {
        let pts: Vec<_> = fit_grid().into_iter().map(|g| (g, 1.0 - 2.5 * g * g)).collect();
        let fit = fit_quadratic_coefficient(&pts).unwrap();
        assert!((fit.quadratic - 2.5).abs() < 1e-6);
    }

    #[test]
    fn fit_absorbs_cubic() {
        let pts: Vec<_> = (1..=10)
            .map(|k| {
                let g = 0.001 * k as f64;
                (g, 1.0 - g * g + g * g * g)
            })
            .collect();
        let fit = fit_quadratic_coefficient(&pts).unwrap();
        assert!((fit.quadratic - 1.0).abs() < 1e-2);
        assert!((fit.cubic + 1.0).abs() < 1e-3);
        assert!(fit.residual_norm < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let pts = [(0.001, 1.0), (0.002, 1.0), (0.003, 1.0)];
        assert!(fit_quadratic_coefficient(&pts).is_err());
        let pts = [(0.001, 1.0), (0.002, 1.0), (0.003, 1.0), (0.5, 0.9)];
        assert!(fit_quadratic_coefficient(&pts).is_err());
        let pts = [(0.001, 1.0); 4];
        assert!(matches!(fit_quadratic_coefficient(&pts), Err(Error::DegenerateFit)));
    }

    #[test]
    fn grid_endpoints() {
        let g = fit_grid();
        assert_eq!(g.len(), 8);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[7] - 1e-2).abs() < 1e-16);
    }

    #[test]
    fn qec_recovery_for_five_qubit_code() {
        let code = five_qubit_code();
        let enc = logical_states(&code).unwrap();
        let r = stabilizer_qec_recovery(&code, &enc).unwrap();
        assert_eq!(r.elements().len(), 16);
        assert!(r.is_trace_preserving(1e-12));
        assert_eq!((r.dim_in(), r.dim_out()), (32, 2));
    }

    #[test]
    fn ambiguous_syndrome_detected() {
        // Z-parity check on two qubits: X on either qubit gives the same syndrome
        let code = StabilizerCode::from_strs(&["ZZ"], "ZI", "XX").unwrap();
        let enc = CodeIsometry::new(ComplexMatrix::from_fn(4, 2, |i, j| {
            if (i, j) == (0, 0) || (i, j) == (3, 1) { ONE } else { C64::new(0.0, 0.0) }
        }), "parity").unwrap();
        assert!(matches!(stabilizer_qec_recovery(&code, &enc), Err(Error::AmbiguousSyndrome { .. })));
    }

    #[test]
    fn decode_only_is_cptp() {
        let r = decode_only_recovery(&leung4_code()).unwrap();
        assert!(r.is_trace_preserving(1e-12));
        assert_eq!(r.elements().len(), 15);
    }

    #[test]
    fn noiseless_fixed_recoveries_are_perfect() {
        let code = Code::five_qubit().unwrap();
        for m in [Method::Qec, Method::DecodeOnly, Method::None] {
            let r = damping_recovery(&code, 0.0, m, &SolverOptions::default()).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-12, "{m}");
        }
        let r = damping_recovery(&Code::leung4(), 0.0, Method::DecodeOnly, &SolverOptions::default()).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qec_needs_stabilizer() {
        let err = damping_recovery(&Code::leung4(), 0.1, Method::Qec, &SolverOptions::default());
        assert!(err.is_err());
    }

    #[test]
    fn method_names() {
        for m in [Method::Optimal, Method::Qec, Method::None, Method::DecodeOnly] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("best".parse::<Method>().is_err());
    }
}
