//! Random states, unitaries and measurements for property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, ComplexMatrix, C64};
use crate::measurement::ProjectiveMeasurement;
use crate::state::DensityMatrix;

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let entries = (0..rows * cols)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ComplexMatrix::from_vec(rows, cols, entries).expect("sized")
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let g = ginibre(dim, dim, rng);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for mut v in g.columns() {
            for u in &cols {
                let proj = linalg::inner(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
            let n = linalg::vector_norm(&v);
            if n < 1e-8 {
                degenerate = true;
                break;
            }
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
        if !degenerate {
            return ComplexMatrix::from_columns(&cols).expect("square");
        }
    }
}

/// Full-rank random state `G G^dagger / Tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(dims: (usize, usize), rng: &mut R) -> DensityMatrix {
    let d = dims.0 * dims.1;
    let g = ginibre(d, d, rng);
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    DensityMatrix::new(dims, gg.scale_real(1.0 / tr)).expect("Ginibre states are valid")
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(dim, dim, rng).hermitian_part()
}

/// Rank-1 measurement in a Haar-random basis.
pub fn random_measurement<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ProjectiveMeasurement {
    ProjectiveMeasurement::from_unitary(&random_unitary(dim, rng)).expect("unitary columns")
}
