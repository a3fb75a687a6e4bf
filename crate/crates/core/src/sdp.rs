//! Interior-point solver for the recovery program
//!
//! ```text
//!   maximize   tr(X C)
//!   subject to X ⪰ 0,  tr_out X = I_in
//! ```
//!
//! over Hermitian `X` on `out ⊗ in`, together with its Lagrangian dual
//!
//! ```text
//!   minimize   tr(Y)
//!   subject to Z = I_out ⊗ Y − C ⪰ 0.
//! ```
//!
//! Both iterates stay feasible: the start `X₀ = I/d_out`, `Y₀ = (1+‖C‖₂) I` is
//! strictly interior, primal steps keep `tr_out ΔX` equal to the (rounding-level)
//! primal residual, and `Z` is always recomputed from `Y`. The duality gap is then
//! `tr(Y) − tr(XC) = tr(XZ)`.
//!
//! Search directions are the HKM (`X ΔZ Z⁻¹`) directions with a Mehrotra
//! predictor-corrector choice of the centering parameter. The Newton system is
//! reduced to a real symmetric positive-definite Schur complement in the
//! coordinates of an orthonormal Hermitian basis of the input factor, which has
//! `d_in²` unknowns, and is solved by Cholesky factorization.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::channel::ChoiOperator;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian_unchecked, kron, partial_trace, ComplexMatrix, Factor, C64, ZERO};

/// Fraction of the distance to the cone boundary taken by each step.
const STEP_FRACTION: f64 = 0.98;

/// Bound on `‖tr_out X − I‖_max` required for convergence.
pub const TP_TOL: f64 = 1e-8;

/// Asymmetry of the cost matrix absorbed by re-Hermitizing.
const COST_HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    d_out: usize,
    d_in: usize,
    cost: ComplexMatrix,
}

impl SdpProblem {
    pub fn new(d_out: usize, d_in: usize, cost: ComplexMatrix) -> Result<Self> {
        let side = d_out * d_in;
        if side == 0 || cost.shape() != (side, side) {
            return Err(Error::dims(
                format!("side {side}"),
                format!("{}x{}", cost.rows(), cost.cols()),
            ));
        }
        let asymmetry = cost.hermitian_asymmetry();
        if asymmetry > COST_HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self {
            d_out,
            d_in,
            cost: cost.hermitian_part(),
        })
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn cost(&self) -> &ComplexMatrix {
        &self.cost
    }

    /// `tr(X C)` for a candidate Choi operator.
    pub fn objective(&self, x: &ChoiOperator) -> Result<f64> {
        if (x.dim_out(), x.dim_in()) != (self.d_out, self.d_in) {
            return Err(Error::dims(
                format!("{} -> {}", self.d_in, self.d_out),
                format!("{} -> {}", x.dim_in(), x.dim_out()),
            ));
        }
        Ok(x.matrix().trace_product(&self.cost).re)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative duality-gap target: stop once `gap ≤ tol · max(1, |primal|)`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 200,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `‖tr_out X − I‖_max`
    pub tp: f64,
    /// Smallest eigenvalue of `X`.
    pub psd: f64,
    /// Smallest eigenvalue of `I ⊗ Y − C`.
    pub dual_psd: f64,
}

/// One line of solver trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    /// Barrier parameter `tr(XZ)/N` at the start of the iteration.
    pub mu: f64,
    pub tp_residual: f64,
    pub sigma: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl fmt::Display for IterationLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:4} primal={:+.15e} dual={:+.15e} gap={:.3e} mu={:.3e} tp={:.3e} sigma={:.3e} ap={:.4} ad={:.4}",
            self.iteration,
            self.primal,
            self.dual,
            self.gap,
            self.mu,
            self.tp_residual,
            self.sigma,
            self.step_primal,
            self.step_dual
        )
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: ChoiOperator,
    pub dual_y: ComplexMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub history: Vec<IterationLog>,
}

impl SdpSolution {
    /// Checks the certificate against the bounds for a solve at `tol`.
    pub fn certificate_holds(&self, tol: f64) -> bool {
        self.residuals.tp <= TP_TOL
            && self.residuals.psd >= -1e-9
            && self.residuals.dual_psd >= -1e-8
            && self.gap >= -1e-9
            && self.gap <= tol * (1.0 + self.primal_value.abs())
    }
}

/// An orthonormal Hermitian basis element, stored by its (at most two)
/// nonzero entries `(row, col, value)`.
#[derive(Debug, Clone, Copy)]
struct BasisElement {
    entries: [(usize, usize, C64); 2],
    len: usize,
}

impl BasisElement {
    fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries[..self.len]
    }
}

fn hermitian_basis(n: usize) -> Vec<BasisElement> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * n);
    for a in 0..n {
        basis.push(BasisElement {
            entries: [(a, a, C64::new(1.0, 0.0)), (a, a, ZERO)],
            len: 1,
        });
    }
    for a in 0..n {
        for b in a + 1..n {
            basis.push(BasisElement {
                entries: [(a, b, C64::new(s, 0.0)), (b, a, C64::new(s, 0.0))],
                len: 2,
            });
            basis.push(BasisElement {
                entries: [(a, b, C64::new(0.0, s)), (b, a, C64::new(0.0, -s))],
                len: 2,
            });
        }
    }
    basis
}

/// Coordinates `tr(E_k R)` of a Hermitian matrix.
fn project(basis: &[BasisElement], r: &ComplexMatrix) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis
            .iter()
            .map(|e| e.entries().iter().map(|&(a, b, c)| (c * r[(b, a)]).re).sum::<f64>()),
    )
}

fn assemble(basis: &[BasisElement], y: &DVector<f64>, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for (e, &coef) in basis.iter().zip(y.iter()) {
        for &(a, b, c) in e.entries() {
            m[(a, b)] += c * coef;
        }
    }
    m
}

struct Workspace<'a> {
    problem: &'a SdpProblem,
    basis: Vec<BasisElement>,
    id_out: ComplexMatrix,
}

impl<'a> Workspace<'a> {
    fn new(problem: &'a SdpProblem) -> Self {
        Self {
            problem,
            basis: hermitian_basis(problem.d_in),
            id_out: ComplexMatrix::identity(problem.d_out),
        }
    }

    fn tr_out(&self, m: &ComplexMatrix) -> ComplexMatrix {
        partial_trace(m, (self.problem.d_out, self.problem.d_in), Factor::First)
            .expect("iterate has the problem's side")
    }

    fn lift(&self, y: &ComplexMatrix) -> ComplexMatrix {
        kron(&self.id_out, y)
    }

    fn dual_slack(&self, y: &ComplexMatrix) -> ComplexMatrix {
        &self.lift(y) - &self.problem.cost
    }

    /// Real Schur complement `M_kl = Re tr((I⊗E_k) X (I⊗E_l) Z⁻¹)`.
    fn schur(&self, x: &ComplexMatrix, z_inv: &ComplexMatrix) -> DMatrix<f64> {
        let (d_out, n) = (self.problem.d_out, self.problem.d_in);
        let nn = n * n;
        let side = d_out * n;
        // K[(i,i'),(j,j')] = Σ_{o,o'} X[(o,i),(o',j)] Z⁻¹[(o',j'),(o,i')], so that
        // tr_out(X (I⊗D) Z⁻¹) = devec(K vec D).
        let mut k = vec![ZERO; nn * nn];
        for o in 0..d_out {
            for o2 in 0..d_out {
                for i in 0..n {
                    for j in 0..n {
                        let xv = x[(o * n + i, o2 * n + j)];
                        if xv == ZERO {
                            continue;
                        }
                        for ip in 0..n {
                            let row = (i * n + ip) * nn + j * n;
                            // Z⁻¹ is Hermitian, so read the conjugate of the contiguous row
                            let zrow = &z_inv.as_slice()[(o * n + ip) * side + o2 * n..][..n];
                            for (kv, zv) in k[row..row + n].iter_mut().zip(zrow) {
                                *kv += xv * zv.conj();
                            }
                        }
                    }
                }
            }
        }
        let m_dim = self.basis.len();
        let mut m = DMatrix::<f64>::zeros(m_dim, m_dim);
        for (l, el) in self.basis.iter().enumerate() {
            for (kk, ek) in self.basis.iter().enumerate() {
                let mut acc = 0.0;
                for &(a, b, c) in ek.entries() {
                    let row = (b * n + a) * nn;
                    for &(a2, b2, c2) in el.entries() {
                        acc += (c * c2 * k[row + a2 * n + b2]).re;
                    }
                }
                m[(kk, l)] = acc;
            }
        }
        let mt = m.transpose();
        (m + mt) * 0.5
    }
}

enum SchurFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Result<Self> {
        match nalgebra::Cholesky::new(m.clone()) {
            Some(c) => Ok(SchurFactor::Cholesky(c)),
            None => {
                let lu = m.lu();
                if lu.is_invertible() {
                    Ok(SchurFactor::Lu(lu))
                } else {
                    Err(Error::Numerical("singular Schur complement".into()))
                }
            }
        }
    }

    fn solve(&self, r: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            SchurFactor::Cholesky(c) => Ok(c.solve(r)),
            SchurFactor::Lu(lu) => lu
                .solve(r)
                .ok_or_else(|| Error::Numerical("singular Schur complement".into())),
        }
    }
}

/// Largest `α` with `M + α D ⪰ 0`, given a Cholesky factor of `M ≻ 0`.
fn max_step(chol_l: &DMatrix<C64>, d: &ComplexMatrix) -> f64 {
    let dn = d.to_nalgebra();
    // S = L⁻¹ D L⁻†
    let left = chol_l
        .solve_lower_triangular(&dn)
        .expect("Cholesky factor is nonsingular");
    let s = chol_l
        .solve_lower_triangular(&left.adjoint())
        .expect("Cholesky factor is nonsingular")
        .adjoint();
    let s = ComplexMatrix::from_nalgebra(&s).hermitian_part();
    let min = eig_hermitian_unchecked(&s).min_value();
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

fn cholesky_factor(m: &ComplexMatrix) -> Option<DMatrix<C64>> {
    nalgebra::Cholesky::new(m.hermitian_part().to_nalgebra()).map(|c| c.l())
}

fn inverse_from_factor(l: &DMatrix<C64>) -> ComplexMatrix {
    let n = l.nrows();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("Cholesky factor is nonsingular");
    ComplexMatrix::from_nalgebra(&(l_inv.adjoint() * l_inv)).hermitian_part()
}

fn spectral_norm(m: &ComplexMatrix) -> f64 {
    let e = eig_hermitian_unchecked(m);
    e.values
        .first()
        .copied()
        .unwrap_or(0.0)
        .abs()
        .max(e.min_value().abs())
}

pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    solve_inner(problem, opts, None)
}

/// Like [`solve`], writing one trace line per iteration to `trace`.
pub fn solve_traced(problem: &SdpProblem, opts: &SolverOptions, trace: &mut dyn Write) -> Result<SdpSolution> {
    solve_inner(problem, opts, Some(trace))
}

fn solve_inner(
    problem: &SdpProblem,
    opts: &SolverOptions,
    mut trace: Option<&mut dyn Write>,
) -> Result<SdpSolution> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {} must be positive", opts.tol)));
    }
    let ws = Workspace::new(problem);
    let (d_out, d_in) = (problem.d_out, problem.d_in);
    let side = d_out * d_in;
    let id_in = ComplexMatrix::identity(d_in);
    let c = &problem.cost;

    let mut x = ComplexMatrix::identity(side).scale_real(1.0 / d_out as f64);
    let mut y = id_in.scale_real(1.0 + spectral_norm(c));
    let mut history = Vec::new();
    let mut best: Option<(f64, ComplexMatrix, ComplexMatrix)> = None;

    for iteration in 0..=opts.max_iterations {
        let z = ws.dual_slack(&y);
        let primal = x.trace_product(c).re;
        let dual = y.trace().re;
        let gap = dual - primal;
        let rp = &id_in - &ws.tr_out(&x);
        let tp_residual = rp.max_abs();

        if best.as_ref().is_none_or(|(g, _, _)| gap < *g) {
            best = Some((gap, x.clone(), y.clone()));
        }

        let converged = gap <= opts.tol * primal.abs().max(1.0) && tp_residual <= TP_TOL;
        if converged || iteration == opts.max_iterations {
            let solution = finish(problem, &ws, x, y, iteration, history)?;
            return if converged {
                Ok(solution)
            } else {
                Err(not_converged(problem, &ws, best, iteration, solution.history))
            };
        }

        let x_chol = cholesky_factor(&x);
        let z_chol = cholesky_factor(&z);
        let (Some(x_chol), Some(z_chol)) = (x_chol, z_chol) else {
            let history_so_far = history.clone();
            return Err(not_converged(problem, &ws, best, iteration, history_so_far));
        };
        let z_inv = inverse_from_factor(&z_chol);
        let mu = x.trace_product(&z).re / side as f64;

        let schur = SchurFactor::new(ws.schur(&x, &z_inv))?;

        // ΔX = Herm(G − X (I⊗ΔY) Z⁻¹), with ΔY chosen so tr_out ΔX = rp.
        let direction = |g: &ComplexMatrix| -> Result<(ComplexMatrix, ComplexMatrix)> {
            let rhs = &ws.tr_out(g).hermitian_part() - &rp;
            let dy = assemble(&ws.basis, &schur.solve(&project(&ws.basis, &rhs))?, d_in);
            let dz = ws.lift(&dy);
            let dx = (g - &(&(&x * &dz) * &z_inv)).hermitian_part();
            Ok((dx, dy))
        };

        // predictor
        let (dx_aff, dy_aff) = direction(&(-&x))?;
        let dz_aff = ws.lift(&dy_aff);
        let ap_aff = (STEP_FRACTION * max_step(&x_chol, &dx_aff)).min(1.0);
        let ad_aff = (STEP_FRACTION * max_step(&z_chol, &dz_aff)).min(1.0);
        let x_aff = &x + &dx_aff.scale_real(ap_aff);
        let z_aff = &z + &dz_aff.scale_real(ad_aff);
        let mu_aff = x_aff.trace_product(&z_aff).re / side as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let mut g = z_inv.scale_real(sigma * mu);
        g -= &x;
        g -= &(&(&dx_aff * &dz_aff) * &z_inv);
        let (dx, dy) = direction(&g)?;
        let dz = ws.lift(&dy);
        let step_primal = (STEP_FRACTION * max_step(&x_chol, &dx)).min(1.0);
        let step_dual = (STEP_FRACTION * max_step(&z_chol, &dz)).min(1.0);

        let log = IterationLog {
            iteration,
            primal,
            dual,
            gap,
            mu,
            tp_residual,
            sigma,
            step_primal,
            step_dual,
        };
        if let Some(w) = trace.as_deref_mut() {
            writeln!(w, "{log}")?;
        }
        history.push(log);

        if step_primal < 1e-12 && step_dual < 1e-12 {
            return Err(not_converged(problem, &ws, best, iteration, history));
        }

        x += &dx.scale_real(step_primal);
        x = x.hermitian_part();
        y += &dy.scale_real(step_dual);
        y = y.hermitian_part();
    }
    unreachable!("loop returns at max_iterations")
}

fn not_converged(
    problem: &SdpProblem,
    ws: &Workspace<'_>,
    best: Option<(f64, ComplexMatrix, ComplexMatrix)>,
    iterations: usize,
    history: Vec<IterationLog>,
) -> Error {
    let (_, x, y) = best.expect("at least one iterate");
    match finish(problem, ws, x, y, iterations, history) {
        Ok(sol) => Error::NotConverged { best: Box::new(sol) },
        Err(e) => e,
    }
}

fn finish(
    problem: &SdpProblem,
    ws: &Workspace<'_>,
    x: ComplexMatrix,
    y: ComplexMatrix,
    iterations: usize,
    history: Vec<IterationLog>,
) -> Result<SdpSolution> {
    let x = x.hermitian_part();
    let y = y.hermitian_part();
    let primal_value = x.trace_product(&problem.cost).re;
    let dual_value = y.trace().re;
    let z = ws.dual_slack(&y);
    let residuals = Residuals {
        tp: (&ComplexMatrix::identity(problem.d_in) - &ws.tr_out(&x)).max_abs(),
        psd: eig_hermitian_unchecked(&x).min_value(),
        dual_psd: eig_hermitian_unchecked(&z).min_value(),
    };
    Ok(SdpSolution {
        x: ChoiOperator::new(problem.d_in, problem.d_out, x)?,
        dual_y: y,
        primal_value,
        dual_value,
        gap: dual_value - primal_value,
        iterations,
        residuals,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vectorize;

    #[test]
    fn basis_is_orthonormal() {
        let n = 3;
        let basis = hermitian_basis(n);
        assert_eq!(basis.len(), n * n);
        let mats: Vec<_> = basis
            .iter()
            .map(|e| {
                let mut m = ComplexMatrix::zeros(n, n);
                for &(a, b, c) in e.entries() {
                    m[(a, b)] += c;
                }
                m
            })
            .collect();
        for (i, a) in mats.iter().enumerate() {
            assert!(a.is_hermitian(1e-15));
            for (j, b) in mats.iter().enumerate() {
                let ip = a.inner(b);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-15 && ip.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn project_assemble_round_trip() {
        let n = 3;
        let basis = hermitian_basis(n);
        let m = ComplexMatrix::from_fn(n, n, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64))
            .hermitian_part();
        let back = assemble(&basis, &project(&basis, &m), n);
        assert!(back.max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn schur_matches_direct_definition() {
        let (d_out, d_in) = (2, 2);
        let side = d_out * d_in;
        let x = ComplexMatrix::from_fn(side, side, |i, j| {
            C64::new(if i == j { 2.0 } else { 0.1 * (i + j) as f64 }, 0.05 * (i as f64 - j as f64))
        })
        .hermitian_part();
        let z_inv = ComplexMatrix::from_fn(side, side, |i, j| {
            C64::new(if i == j { 1.5 } else { 0.07 * (i * j) as f64 }, 0.03 * (j as f64 - i as f64))
        })
        .hermitian_part();
        let problem = SdpProblem::new(d_out, d_in, ComplexMatrix::identity(side)).unwrap();
        let ws = Workspace::new(&problem);
        let m = ws.schur(&x, &z_inv);
        let unit = |k: usize| {
            let e = DVector::from_fn(4, |i, _| if i == k { 1.0 } else { 0.0 });
            ws.lift(&assemble(&ws.basis, &e, 2))
        };
        for k in 0..4 {
            for l in 0..4 {
                let direct = (&(&(&unit(k) * &x) * &unit(l)) * &z_inv).trace().re;
                assert!((m[(k, l)] - direct).abs() < 1e-13, "entry ({k},{l})");
            }
        }
    }

    #[test]
    fn scalar_problem() {
        let p = SdpProblem::new(1, 1, ComplexMatrix::from_diag(&[0.37])).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!((sol.primal_value - 0.37).abs() < 1e-12);
        assert!(sol.certificate_holds(1e-8));
    }

    #[test]
    fn perfect_recovery_problem() {
        let rho = ComplexMatrix::identity(2).scale_real(0.5);
        let k = vectorize(&rho);
        let p = SdpProblem::new(2, 2, k.outer(&k)).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!((sol.primal_value - 1.0).abs() < 1e-8);
        assert!(sol.certificate_holds(1e-8));
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = ComplexMatrix::identity(4);
        c[(0, 1)] = C64::new(1e-6, 0.0);
        assert!(matches!(SdpProblem::new(2, 2, c), Err(Error::NotHermitian { .. })));
        assert!(SdpProblem::new(2, 3, ComplexMatrix::identity(4)).is_err());
        let p = SdpProblem::new(1, 1, ComplexMatrix::identity(1)).unwrap();
        assert!(solve(&p, &SolverOptions::with_tol(0.0)).is_err());
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let rho = ComplexMatrix::identity(2).scale_real(0.5);
        let k = vectorize(&rho);
        let p = SdpProblem::new(2, 2, k.outer(&k)).unwrap();
        let opts = SolverOptions {
            tol: 1e-8,
            max_iterations: 2,
        };
        match solve(&p, &opts) {
            Err(Error::NotConverged { best }) => {
                assert!(best.gap > 0.0);
                assert!(best.residuals.tp < 1e-10);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn dust_is_absorbed() {
        let mut c = ComplexMatrix::identity(4);
        c[(0, 1)] = C64::new(1e-14, 0.0);
        let p = SdpProblem::new(2, 2, c).unwrap();
        assert!(p.cost().is_hermitian(0.0));
    }
}
