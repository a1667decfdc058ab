//! Seeded random matrices for fixtures, benchmarks and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{dot, RealMatrix};

/// The generator used for every seeded draw in this crate.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `m × n` matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> RealMatrix {
    let mut rng = rng_from_seed(seed);
    let data = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    RealMatrix::new(m, n, data).expect("gaussian entries are finite")
}

/// Haar-ish random orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> RealMatrix {
    let g = gaussian_matrix(n, n, seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    // columns of the result are the basis vectors
    let mut data = vec![0.0; n * n];
    for (j, q) in basis.iter().enumerate() {
        for (i, &x) in q.iter().enumerate() {
            data[i * n + j] = x;
        }
    }
    RealMatrix::new(n, n, data).expect("finite")
}
