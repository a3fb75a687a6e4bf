//! Quantum channels in operator-sum (Kraus) and Choi form.
//!
//! A channel `ℰ: L(H) → L(K)` with elements `{E_k}` has Choi operator
//! `X = Σ_k |E_k⟩⟩⟨⟨E_k|` on `K ⊗ H`: output factor first, input factor second.
//! It is trace preserving iff tracing out the output (first) factor of `X`
//! leaves the identity on `H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, kron, partial_trace, vectorize, ComplexMatrix, Factor, C64, ONE, ZERO,
};

/// Tolerance for the trace-preserving check done by [`KrausChannel::new_cptp`].
pub const TP_TOL: f64 = 1e-10;

/// Eigenvalues of a Choi operator at or below this fraction of the largest are
/// dropped when extracting operator elements.
pub const KRAUS_RETENTION: f64 = 1e-10;

/// Choi eigenvalues more negative than this reject the extraction as non-CP.
pub const CP_TOL: f64 = 1e-9;

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    rho: ComplexMatrix,
}

impl DensityOperator {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidDensity(format!(
                "not square: {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        if !rho.is_hermitian(Self::HERMITIAN_TOL) {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min = eig_hermitian(&rho)?.min_value();
        if min < -Self::PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            rho: rho.hermitian_part(),
        })
    }

    /// Wraps a matrix without validation, e.g. the output of a channel that is
    /// not known to be CPTP.
    pub fn from_matrix_unchecked(rho: ComplexMatrix) -> Self {
        Self { rho }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            rho: ComplexMatrix::outer(&v, &v),
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    /// `tr(ρ²)`
    pub fn purity(&self) -> f64 {
        self.rho.trace_product(&self.rho).re
    }
}

/// Operator-sum representation `ℰ(ρ) = Σ_k E_k ρ E_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    elements: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one element".into()))?;
        let (dim_out, dim_in) = first.shape();
        for e in &elements[1..] {
            if e.shape() != (dim_out, dim_in) {
                return Err(Error::dims(
                    format!("{dim_out}x{dim_in}"),
                    format!("{}x{}", e.rows(), e.cols()),
                ));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            elements,
        })
    }

    /// Like [`KrausChannel::new`] but also requires `Σ E_k†E_k = I` to [`TP_TOL`].
    pub fn new_cptp(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::new(elements)?;
        let residual = ch.tp_residual();
        if residual > TP_TOL {
            return Err(Error::InvalidParameter(format!(
                "operator elements are not trace preserving (residual {residual:e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            elements: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<ComplexMatrix> {
        self.elements
    }

    /// `Σ_k E_k† E_k`
    pub fn completeness(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for e in &self.elements {
            acc += &(&e.adjoint() * e);
        }
        acc
    }

    pub fn tp_residual(&self) -> f64 {
        self.completeness()
            .max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.tp_residual() <= tol
    }

    pub fn to_choi(&self) -> ChoiOperator {
        let n = self.dim_in * self.dim_out;
        let mut x = ComplexMatrix::zeros(n, n);
        for e in &self.elements {
            let k = vectorize(e);
            x += &k.outer(&k);
        }
        ChoiOperator {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            x,
        }
    }

    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::dims(
                format!("{0}x{0}", self.dim_in),
                format!("{}x{}", rho.rows(), rho.cols()),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for e in &self.elements {
            out += &e.conjugate(rho);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.apply_matrix(rho.matrix())
            .map(DensityOperator::from_matrix_unchecked)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.dim_out != self.dim_in {
            return Err(Error::dims(self.dim_in, first.dim_out));
        }
        let mut elements = Vec::with_capacity(self.elements.len() * first.elements.len());
        for r in &self.elements {
            for e in &first.elements {
                elements.push(r * e);
            }
        }
        KrausChannel::new(elements)
    }

    /// Drops elements whose Frobenius norm is at or below `tol`.
    pub fn pruned(&self, tol: f64) -> KrausChannel {
        let mut elements: Vec<_> = self
            .elements
            .iter()
            .filter(|e| e.frobenius_norm() > tol)
            .cloned()
            .collect();
        if elements.is_empty() {
            elements.push(ComplexMatrix::zeros(self.dim_out, self.dim_in));
        }
        KrausChannel {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            elements,
        }
    }

    pub fn to_spec(&self) -> ChannelSpec {
        ChannelSpec {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.elements.iter().map(to_nested).collect(),
        }
    }

    pub fn from_spec(spec: &ChannelSpec) -> Result<Self> {
        let elements = spec
            .kraus
            .iter()
            .map(|m| from_nested(m))
            .collect::<Result<Vec<_>>>()?;
        let ch = Self::new(elements)?;
        if (ch.dim_in, ch.dim_out) != (spec.dim_in, spec.dim_out) {
            return Err(Error::dims(
                format!("{}x{}", spec.dim_out, spec.dim_in),
                format!("{}x{}", ch.dim_out, ch.dim_in),
            ));
        }
        Ok(ch)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(s)?)
    }
}

/// Serialized channel: each element is a row-major nested array of `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn to_nested(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn from_nested(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::InvalidParameter("ragged matrix rows".into()));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    ComplexMatrix::new(n_rows, n_cols, data)
}

/// Choi operator of a channel `L(C^dim_in) → L(C^dim_out)`, on `out ⊗ in`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator {
    dim_in: usize,
    dim_out: usize,
    x: ComplexMatrix,
}

impl ChoiOperator {
    /// Accepts any Hermitian matrix of the right side; complete positivity is
    /// reported by [`is_cptp`], not enforced here.
    pub fn new(dim_in: usize, dim_out: usize, x: ComplexMatrix) -> Result<Self> {
        if x.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::dims(
                format!("side {}", dim_in * dim_out),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        x.check_hermitian()?;
        Ok(Self {
            dim_in,
            dim_out,
            x: x.hermitian_part(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel::identity(dim).to_choi()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.x
    }

    /// `tr_out X`, which is the identity for trace-preserving maps.
    pub fn output_traced(&self) -> ComplexMatrix {
        partial_trace(&self.x, (self.dim_out, self.dim_in), Factor::First)
            .expect("Choi side is dim_out*dim_in")
    }

    pub fn tp_residual(&self) -> f64 {
        self.output_traced()
            .max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    /// Operator elements `√λ_m · devec(v_m)` from the eigenpairs of `X`.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let eig = eig_hermitian(&self.x)?;
        let min = eig.min_value();
        if min < -CP_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let max = eig.values.first().copied().unwrap_or(0.0);
        let threshold = KRAUS_RETENTION * max;
        let mut elements = Vec::new();
        for (m, &lambda) in eig.values.iter().enumerate() {
            if lambda <= threshold || lambda <= 0.0 {
                break;
            }
            let scale = lambda.sqrt();
            let v: Vec<C64> = eig.vectors.column(m).iter().map(|z| z * scale).collect();
            elements.push(ComplexMatrix::new(self.dim_out, self.dim_in, v)?);
        }
        if elements.is_empty() {
            elements.push(ComplexMatrix::zeros(self.dim_out, self.dim_in));
        }
        KrausChannel::new(elements)
    }

    /// `tr_in[(I ⊗ ρᵀ) X]`
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (d_in, d_out) = (self.dim_in, self.dim_out);
        if rho.shape() != (d_in, d_in) {
            return Err(Error::dims(
                format!("{d_in}x{d_in}"),
                format!("{}x{}", rho.rows(), rho.cols()),
            ));
        }
        Ok(ComplexMatrix::from_fn(d_out, d_out, |a, b| {
            let mut acc = ZERO;
            for j in 0..d_in {
                for i in 0..d_in {
                    acc += rho[(j, i)] * self.x[(a * d_in + j, b * d_in + i)];
                }
            }
            acc
        }))
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.apply_matrix(rho.matrix())
            .map(DensityOperator::from_matrix_unchecked)
    }
}

/// Either channel representation.
#[derive(Debug, Clone, Copy)]
pub enum ChannelRef<'a> {
    Kraus(&'a KrausChannel),
    Choi(&'a ChoiOperator),
}

impl<'a> From<&'a KrausChannel> for ChannelRef<'a> {
    fn from(k: &'a KrausChannel) -> Self {
        ChannelRef::Kraus(k)
    }
}

impl<'a> From<&'a ChoiOperator> for ChannelRef<'a> {
    fn from(c: &'a ChoiOperator) -> Self {
        ChannelRef::Choi(c)
    }
}

impl ChannelRef<'_> {
    pub fn dim_in(&self) -> usize {
        match self {
            ChannelRef::Kraus(k) => k.dim_in(),
            ChannelRef::Choi(c) => c.dim_in(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            ChannelRef::Kraus(k) => k.dim_out(),
            ChannelRef::Choi(c) => c.dim_out(),
        }
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        match self {
            ChannelRef::Kraus(k) => k.apply(rho),
            ChannelRef::Choi(c) => c.apply(rho),
        }
    }
}

/// Channel `ρ ↦ E₀ρE₀† + E₁ρE₁†` with `E₀ = diag(1, √(1-γ))`, `E₁ = √γ |0⟩⟨1|`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "damping probability {gamma} outside [0, 1]"
        )));
    }
    let e0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?;
    let e1 = ComplexMatrix::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
    KrausChannel::new(vec![e0, e1])
}

/// Diagnostic from [`is_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub cp: bool,
    pub tp: bool,
    /// Smallest Choi eigenvalue; `None` for operator-sum channels, which are
    /// completely positive by construction.
    pub min_eigenvalue: Option<f64>,
    /// `max |tr_out X - I|`, equivalently `max |Σ E†E - I|`.
    pub tp_residual: f64,
}

pub fn is_cptp<'a>(ch: impl Into<ChannelRef<'a>>, tol: f64) -> CptpReport {
    match ch.into() {
        ChannelRef::Kraus(k) => {
            let tp_residual = k.tp_residual();
            CptpReport {
                cp: true,
                tp: tp_residual <= tol,
                min_eigenvalue: None,
                tp_residual,
            }
        }
        ChannelRef::Choi(c) => {
            let min = eig_hermitian(c.matrix())
                .map(|e| e.min_value())
                .unwrap_or(f64::NEG_INFINITY);
            let tp_residual = c.tp_residual();
            CptpReport {
                cp: min >= -tol,
                tp: tp_residual <= tol,
                min_eigenvalue: Some(min),
                tp_residual,
            }
        }
    }
}

/// Choi operator of `ℛ ∘ ℰ`: `Σ_j (I ⊗ E_jᵀ) X_ℛ (I ⊗ E_j*)`.
pub fn compose_choi(x_r: &ChoiOperator, e: &KrausChannel) -> Result<ChoiOperator> {
    if x_r.dim_in() != e.dim_out() {
        return Err(Error::dims(x_r.dim_in(), e.dim_out()));
    }
    let d_out = x_r.dim_out();
    let id = ComplexMatrix::identity(d_out);
    let side = d_out * e.dim_in();
    let mut x = ComplexMatrix::zeros(side, side);
    for ej in e.elements() {
        let left = kron(&id, &ej.transpose());
        x += &left.conjugate(x_r.matrix());
    }
    Ok(ChoiOperator {
        dim_in: e.dim_in(),
        dim_out: d_out,
        x: x.hermitian_part(),
    })
}

/// `ch^{⊗n}`; the first factor of every product acts on the most significant
/// index.
pub fn tensor_power(ch: &KrausChannel, n: usize) -> Result<KrausChannel> {
    if n == 0 {
        return Err(Error::InvalidParameter("tensor power must be at least 1".into()));
    }
    let mut elements = ch.elements().to_vec();
    for _ in 1..n {
        let mut next = Vec::with_capacity(elements.len() * ch.elements().len());
        for acc in &elements {
            for e in ch.elements() {
                next.push(kron(acc, e));
            }
        }
        elements = next;
    }
    KrausChannel::new(elements)
}
