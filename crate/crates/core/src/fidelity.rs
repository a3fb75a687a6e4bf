//! Fidelity measures and the cost matrix of the recovery program.

use log::warn;

use crate::channel::{ChannelRef, ChoiOperator, DensityOperator, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, psd_sqrt, vectorize, ComplexMatrix, C64, ZERO};

/// `tr √(ρ^{1/2} σ ρ^{1/2})`, clamped to `[0, 1]`.
pub fn state_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dims(rho.dim(), sigma.dim()));
    }
    let s = psd_sqrt(rho.matrix())?;
    let inner = (&(&s * sigma.matrix()) * &s).hermitian_part();
    let f: f64 = eig_hermitian(&inner)?
        .values
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Pure state on `reference ⊗ system` whose system marginal is a given density.
#[derive(Debug, Clone, PartialEq)]
pub struct PurifiedState {
    dim_ref: usize,
    dim_sys: usize,
    amplitudes: Vec<C64>,
}

impl PurifiedState {
    pub fn dim_ref(&self) -> usize {
        self.dim_ref
    }

    pub fn dim_sys(&self) -> usize {
        self.dim_sys
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Traces out the reference factor.
    pub fn system_marginal(&self) -> ComplexMatrix {
        let (da, dh) = (self.dim_ref, self.dim_sys);
        ComplexMatrix::from_fn(dh, dh, |i, j| {
            (0..da)
                .map(|a| self.amplitudes[a * dh + i] * self.amplitudes[a * dh + j].conj())
                .sum()
        })
    }
}

/// `Σ_k √λ_k |k⟩_A |v_k⟩` over the eigenpairs of `ρ` with nonzero weight.
pub fn purify(rho: &DensityOperator) -> Result<PurifiedState> {
    let eig = eig_hermitian(rho.matrix())?;
    let dh = rho.dim();
    let max = eig.values.first().copied().unwrap_or(0.0);
    let kept: Vec<usize> = (0..dh)
        .filter(|&k| eig.values[k] > 1e-12 * max.max(1e-300))
        .collect();
    let da = kept.len().max(1);
    let mut amplitudes = vec![ZERO; da * dh];
    for (a, &k) in kept.iter().enumerate() {
        let w = eig.values[k].sqrt();
        for i in 0..dh {
            amplitudes[a * dh + i] = eig.vectors[(i, k)] * w;
        }
    }
    Ok(PurifiedState {
        dim_ref: da,
        dim_sys: dh,
        amplitudes,
    })
}

fn check_square_channel(rho: &DensityOperator, ch: ChannelRef<'_>) -> Result<()> {
    if ch.dim_in() != rho.dim() || ch.dim_out() != rho.dim() {
        return Err(Error::dims(
            format!("channel on dimension {}", rho.dim()),
            format!("{} -> {}", ch.dim_in(), ch.dim_out()),
        ));
    }
    Ok(())
}

/// `Σ_i |tr(ρ B_i)|²`
pub fn entanglement_fidelity_kraus(rho: &DensityOperator, ch: &KrausChannel) -> Result<f64> {
    check_square_channel(rho, ch.into())?;
    Ok(ch
        .elements()
        .iter()
        .map(|b| rho.matrix().trace_product(b).norm_sqr())
        .sum())
}

/// `⟨⟨ρ| X_ℬ |ρ⟩⟩`
pub fn entanglement_fidelity_choi(rho: &DensityOperator, ch: &ChoiOperator) -> Result<f64> {
    check_square_channel(rho, ch.into())?;
    Ok(quadratic_form(ch.matrix(), vectorize(rho.matrix()).amplitudes()))
}

/// `Re ⟨v| m |v⟩`
pub(crate) fn quadratic_form(m: &ComplexMatrix, v: &[C64]) -> f64 {
    let mv = m.mul_vec(v);
    v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Entanglement fidelity, evaluated with whichever formula matches the
/// channel representation.
pub fn entanglement_fidelity<'a>(rho: &DensityOperator, ch: impl Into<ChannelRef<'a>>) -> Result<f64> {
    match ch.into() {
        ChannelRef::Kraus(k) => entanglement_fidelity_kraus(rho, k),
        ChannelRef::Choi(c) => entanglement_fidelity_choi(rho, c),
    }
}

/// Reference evaluation: purify `ρ`, push the purification through
/// `I_A ⊗ ℬ`, and take the overlap `⟨AH| out |AH⟩`.
///
/// Builds the full `d_A·d_H` output state, so it is only meant for checking
/// the cheaper formulas on small systems.
pub fn entanglement_fidelity_purification<'a>(
    rho: &DensityOperator,
    ch: impl Into<ChannelRef<'a>>,
) -> Result<f64> {
    let ch = ch.into();
    check_square_channel(rho, ch)?;
    let kraus = match ch {
        ChannelRef::Kraus(k) => k.clone(),
        ChannelRef::Choi(c) => c.to_kraus()?,
    };
    let psi = purify(rho)?;
    let id_ref = ComplexMatrix::identity(psi.dim_ref());
    let extended = KrausChannel::new(kraus.elements().iter().map(|b| kron(&id_ref, b)).collect())?;
    let input = ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes());
    let output = extended.apply_matrix(&input)?;
    Ok(quadratic_form(&output, psi.amplitudes()))
}

/// States `ρ_i` prepared with probabilities `p_i`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    items: Vec<(f64, DensityOperator)>,
}

impl Ensemble {
    pub fn new(items: Vec<(f64, DensityOperator)>) -> Result<Self> {
        let dim = items
            .first()
            .map(|(_, s)| s.dim())
            .ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?;
        if items.iter().any(|(p, _)| p.is_nan() || *p < 0.0) {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        let total: f64 = items.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}"
            )));
        }
        if let Some((_, s)) = items.iter().find(|(_, s)| s.dim() != dim) {
            return Err(Error::dims(dim, s.dim()));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(f64, DensityOperator)] {
        &self.items
    }

    /// `Σ p_i ρ_i`
    pub fn density(&self) -> DensityOperator {
        let dim = self.items[0].1.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (p, s) in &self.items {
            acc += &s.matrix().scale_real(*p);
        }
        DensityOperator::from_matrix_unchecked(acc)
    }
}

/// `Σ p_i F(ρ_i, ℬ(ρ_i))²`. Mixed members are accepted with a warning since
/// the average is only linear in the channel for pure members.
pub fn ensemble_average_fidelity<'a>(ens: &Ensemble, ch: impl Into<ChannelRef<'a>>) -> Result<f64> {
    let ch = ch.into();
    let mut total = 0.0;
    for (i, (p, state)) in ens.items.iter().enumerate() {
        if state.purity() < 1.0 - 1e-10 {
            warn!("ensemble member {i} is not pure (purity {:.6})", state.purity());
        }
        let out = ch.apply(state)?;
        let f = state_fidelity(state, &out)?;
        total += p * f * f;
    }
    Ok(total)
}

/// `C_{ρ,ℰ} = Σ_j |ρ E_j†⟩⟩⟨⟨ρ E_j†|` on `H ⊗ K`, so that
/// `F(ρ, ℛ∘ℰ) = tr(X_ℛ C_{ρ,ℰ})` for any recovery `ℛ: K → H`.
pub fn data_matrix(rho: &DensityOperator, spread: &KrausChannel) -> Result<ComplexMatrix> {
    if spread.dim_in() != rho.dim() {
        return Err(Error::dims(rho.dim(), spread.dim_in()));
    }
    let side = spread.dim_in() * spread.dim_out();
    let mut c = ComplexMatrix::zeros(side, side);
    for e in spread.elements() {
        let k = vectorize(&(rho.matrix() * &e.adjoint()));
        c += &k.outer(&k);
    }
    Ok(c.hermitian_part())
}
