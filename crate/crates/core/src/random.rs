//! Seeded random states and isometries.
//!
//! Every random draw takes an explicit [`Stream`]. Independent substreams are
//! derived from `(seed, index)` so that per-sample and per-restart work gives
//! the same result regardless of scheduling.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::state::DensityMatrix;

pub type Stream = ChaCha8Rng;

/// Substream `index` of the generator seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard complex Gaussian `(x + iy)/sqrt(2)`.
pub fn complex_gaussian(rng: &mut Stream) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut Stream) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unit vector in `C^d`.
pub fn haar_vector(d: usize, rng: &mut Stream) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// First `cols` columns of a Haar-random `rows x rows` unitary.
///
/// Gram-Schmidt on a Ginibre matrix; this equals QR with a positive diagonal
/// in `R`, which is what makes the result Haar distributed.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut Stream) -> ComplexMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let g = ginibre(rows, cols, rng);
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = g.col(j);
        for _ in 0..2 {
            for u in &q {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|z| z / n).collect());
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i])
}

pub fn haar_unitary(d: usize, rng: &mut Stream) -> ComplexMatrix {
    haar_isometry(d, d, rng)
}

/// Projector onto a Haar-random pure state.
pub fn random_pure_state(d: usize, rng: &mut Stream) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::RankOutOfRange { rank: 1, dim: d });
    }
    DensityMatrix::pure(&haar_vector(d, rng))
}

/// `G G^dagger / Tr(G G^dagger)` with `G` a `d x rank` Ginibre matrix.
pub fn random_density(d: usize, rank: usize, rng: &mut Stream) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::RankOutOfRange { rank, dim: d });
    }
    let g = ginibre(d, rank, rng);
    DensityMatrix::from_unnormalized(&g * &g.adjoint())
}
