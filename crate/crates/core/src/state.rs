//! Validated density matrices, partial traces and von Neumann entropy.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{mismatch, Error, Result};
use crate::linalg::{diagonalize_in_place, hermitian_eigenvalues, ComplexMatrix};

/// Tolerance used when validating states (Hermiticity, trace, positivity).
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-CLIP_TOL, 0)` are treated as exact zeros by the entropy.
pub const CLIP_TOL: f64 = 1e-12;

/// A positive semidefinite, unit-trace, Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        let herm = mat.hermiticity_defect();
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let min = hermitian_eigenvalues(&mat)?[0];
        if min < -STATE_TOL {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(Self { mat })
    }

    /// Normalizes a positive semidefinite matrix by its trace and validates the result.
    pub fn from_unnormalized(mat: ComplexMatrix) -> Result<Self> {
        let tr = mat.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::BadTrace(tr));
        }
        Self::new(mat.scale_real(1.0 / tr).hermitian_part())
    }

    /// `|ψ><ψ| / <ψ|ψ>`
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2.is_nan() || norm2 <= 0.0 {
            return Err(Error::Empty("state vector"));
        }
        let s = 1.0 / norm2.sqrt();
        let v: Vec<Complex64> = psi.iter().map(|z| z * s).collect();
        Self::new(ComplexMatrix::outer(&v, &v))
    }

    /// Computational basis projector `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange {
                name: "k",
                value: k,
                bound: dim,
            });
        }
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        Ok(Self {
            mat: ComplexMatrix::from_real_diagonal(&diag),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// `|Ω><Ω|` with `|Ω> = d^{-1/2} Σ_k |kk>`.
    pub fn maximally_entangled(dim: usize) -> Self {
        let n = dim * dim;
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        let amp = 1.0 / (dim as f64).sqrt();
        for k in 0..dim {
            v[k * dim + k] = Complex64::new(amp, 0.0);
        }
        Self {
            mat: ComplexMatrix::outer(&v, &v),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat).expect("validated state is Hermitian")
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kron(&other.mat),
        }
    }

    pub(crate) fn from_matrix_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.mat.serialize(s)
    }
}

/// Which tensor factor of `H ⊗ K` is traced out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOut {
    /// Trace over `H`, keep `K`.
    First,
    /// Trace over `K`, keep `H`.
    Second,
}

/// Reduced state on the retained factor of a bipartite state on `H ⊗ K`.
pub fn partial_trace(rho: &DensityMatrix, dim_h: usize, dim_k: usize, side: TraceOut) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(rho.matrix(), dim_h, dim_k, side)?;
    Ok(DensityMatrix::from_matrix_unchecked(m.hermitian_part()))
}

/// Partial trace of an arbitrary square operator on `H ⊗ K`.
pub fn partial_trace_matrix(m: &ComplexMatrix, dim_h: usize, dim_k: usize, side: TraceOut) -> Result<ComplexMatrix> {
    let n = dim_h * dim_k;
    if m.shape() != (n, n) {
        return Err(mismatch(
            format!("{n}x{n} ({dim_h}*{dim_k})"),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    Ok(match side {
        TraceOut::Second => ComplexMatrix::from_fn(dim_h, dim_h, |a, b| {
            (0..dim_k).map(|k| m[(a * dim_k + k, b * dim_k + k)]).sum()
        }),
        TraceOut::First => ComplexMatrix::from_fn(dim_k, dim_k, |a, b| {
            (0..dim_h).map(|h| m[(h * dim_k + a, h * dim_k + b)]).sum()
        }),
    })
}

/// `-Σ λ log2 λ` over a spectrum, with `0 log 0 = 0`.
///
/// Eigenvalues in `[-CLIP_TOL, 0)` are clipped to zero; anything below
/// `-STATE_TOL` is rejected. The window between the two is clipped as well,
/// since validated states already guarantee it.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -STATE_TOL {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// `Tr(X) S(X / Tr X)` for a positive semidefinite `X`, computed from the
/// spectrum of `X` directly as `-Σ μ log2 μ + t log2 t`.
pub(crate) fn weighted_entropy(x: &ComplexMatrix) -> f64 {
    weighted_entropy_in_place(&mut x.clone())
}

/// [`weighted_entropy`] that overwrites `x` with its diagonal form.
pub(crate) fn weighted_entropy_in_place(x: &mut ComplexMatrix) -> f64 {
    let n = diagonalize_in_place(x);
    let mut t = 0.0;
    let mut s = 0.0;
    for i in 0..n {
        let m = x[(i, i)].re;
        t += m;
        if m > 0.0 {
            s -= m * m.log2();
        }
    }
    if t <= 0.0 {
        return 0.0;
    }
    (s + t * t.log2()).max(0.0)
}
