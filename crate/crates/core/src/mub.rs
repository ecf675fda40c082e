//! Fourier basis and mutually unbiased bases in prime dimension.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{mismatch, Error, Result};
use crate::linalg::{ComplexMatrix, ONE};
use crate::weyl::{root_of_unity, weyl_operator};

/// Orthonormal basis stored as the columns of a unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    vectors: ComplexMatrix,
}

impl Basis {
    /// Wraps the columns of `vectors`, checking orthonormality within 1e-12.
    pub fn new(vectors: ComplexMatrix) -> Result<Self> {
        if !vectors.is_square() {
            return Err(Error::NotSquare {
                rows: vectors.rows(),
                cols: vectors.cols(),
            });
        }
        let defect = vectors.unitarity_defect();
        if defect > 1e-12 {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self { vectors })
    }

    pub fn computational(d: usize) -> Self {
        Self {
            vectors: ComplexMatrix::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        self.vectors.col(j)
    }

    /// `|b_j><b_j|`
    pub fn projector(&self, j: usize) -> ComplexMatrix {
        let v = self.vector(j);
        ComplexMatrix::outer(&v, &v)
    }
}

/// `e_j = d^{-1/2} Σ_k ω^{jk} |k>`.
pub fn fourier_basis(d: usize) -> Result<Basis> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "d",
            value: d as f64,
            range: ">= 2".into(),
        });
    }
    let amp = 1.0 / (d as f64).sqrt();
    let vectors = ComplexMatrix::from_fn(d, d, |k, j| root_of_unity(d, j * k) * amp);
    Ok(Basis { vectors })
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// `d` pairwise mutually unbiased bases in prime dimension `d`, each also
/// unbiased to the computational basis.
#[derive(Clone, Debug)]
pub struct MubFamily {
    d: usize,
    bases: Vec<Basis>,
    computational: Basis,
}

impl MubFamily {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn basis(&self, s: usize) -> &Basis {
        &self.bases[s]
    }

    pub fn computational(&self) -> &Basis {
        &self.computational
    }

    /// Largest unbiasedness defect over all family pairs and each family
    /// basis against the computational basis.
    pub fn max_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (s, b) in self.bases.iter().enumerate() {
            worst = worst.max(unbiasedness_defect(b, &self.computational).unwrap_or(f64::INFINITY));
            for c in &self.bases[s + 1..] {
                worst = worst.max(unbiasedness_defect(b, c).unwrap_or(f64::INFINITY));
            }
        }
        worst
    }
}

/// For odd prime `d`, basis `s` has `e^s_j[k] = d^{-1/2} ω^{s k² + j k}`, so
/// `s = 0` is the Fourier basis. For `d = 2` the family is the Pauli-X and
/// Pauli-Y eigenbases.
pub fn mub_family(d: usize) -> Result<MubFamily> {
    if !is_prime(d) {
        return Err(Error::PrimeDimensionRequired(d));
    }
    let bases = if d == 2 {
        let h = FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, h);
        let x = ComplexMatrix::from_fn(2, 2, |k, j| match (k, j) {
            (1, 1) => Complex64::new(-h, 0.0),
            _ => Complex64::new(h, 0.0),
        });
        let y = ComplexMatrix::new(2, 2, vec![ONE * h, ONE * h, i, -i])?;
        vec![Basis { vectors: x }, Basis { vectors: y }]
    } else {
        let amp = 1.0 / (d as f64).sqrt();
        (0..d)
            .map(|s| Basis {
                vectors: ComplexMatrix::from_fn(d, d, |k, j| root_of_unity(d, (s * k * k + j * k) % d) * amp),
            })
            .collect()
    };
    Ok(MubFamily {
        d,
        bases,
        computational: Basis::computational(d),
    })
}

/// `max_{j,k} | |<b1_j|b2_k>| - 1/sqrt(d) |`
pub fn unbiasedness_defect(b1: &Basis, b2: &Basis) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return Err(mismatch(b1.dim(), b2.dim()));
    }
    let target = 1.0 / (b1.dim() as f64).sqrt();
    let overlaps = &b1.vectors.adjoint() * &b2.vectors;
    Ok(overlaps
        .data()
        .iter()
        .map(|z| (z.norm() - target).abs())
        .fold(0.0, f64::max))
}

/// `max_j max_entry |W_{0,n}|e_j><e_j|W_{0,n}^† - |e_{j+n}><e_{j+n}||` over the
/// Fourier basis.
pub fn shift_defect(d: usize, n: usize) -> Result<f64> {
    let e = fourier_basis(d)?;
    let w = weyl_operator(d, 0, n)?;
    let mut worst: f64 = 0.0;
    for j in 0..d {
        let moved = w.conjugate(&e.projector(j));
        worst = worst.max(moved.max_abs_diff(&e.projector((j + n) % d)));
    }
    Ok(worst)
}
