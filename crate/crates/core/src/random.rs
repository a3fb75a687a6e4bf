//! Seeded random states and channels for property tests and cross-checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{DensityOperator, KrausChannel};
use crate::linalg::{ComplexMatrix, C64};

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random normalized pure state.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Random density of the given rank, `G G† / tr(G G†)`.
pub fn random_density_with_rank(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ginibre(dim, rank.max(1), rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_matrix_unchecked(m.scale_real(1.0 / tr).hermitian_part())
}

/// Random full-rank density.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    random_density_with_rank(dim, dim, rng)
}

/// Random CPTP map: a Ginibre stack `G` normalized by `(G†G)^{-1/2}`.
/// `n_kraus` is raised to `⌈dim_in/dim_out⌉` when smaller, the fewest
/// elements a trace-preserving map can have.
pub fn random_channel(dim_in: usize, dim_out: usize, n_kraus: usize, rng: &mut impl Rng) -> KrausChannel {
    let n_kraus = n_kraus.max(dim_in.div_ceil(dim_out));
    let stack = ginibre(dim_out * n_kraus, dim_in, rng);
    let gram = &stack.adjoint() * &stack;
    let eig = crate::linalg::eig_hermitian_unchecked(&gram);
    let inv_sqrt = eig.reconstruct_with(|l| 1.0 / l.sqrt());
    let v = &stack * &inv_sqrt;
    let elements = (0..n_kraus)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |i, j| v[(k * dim_out + i, j)]))
        .collect();
    KrausChannel::new(elements).expect("non-empty stack of equal shapes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn channels_are_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (di, d_o, k) in [(2, 2, 1), (3, 2, 4), (2, 4, 3), (4, 4, 16)] {
            let ch = random_channel(di, d_o, k, &mut rng);
            assert!(ch.is_trace_preserving(1e-12));
            assert_eq!(ch.elements().len(), k);
        }
        let ch = random_channel(4, 1, 1, &mut rng);
        assert_eq!(ch.elements().len(), 4);
        assert!(ch.is_trace_preserving(1e-12));
    }

    #[test]
    fn densities_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in 1..=4 {
            let rho = random_density(d, &mut rng);
            DensityOperator::new(rho.matrix().clone()).unwrap();
            let pure = random_density_with_rank(d, 1, &mut rng);
            assert!((pure.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_output_repeats() {
        let a = random_density(3, &mut ChaCha8Rng::seed_from_u64(1));
        let b = random_density(3, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a.matrix().as_slice(), b.matrix().as_slice());
    }
}
