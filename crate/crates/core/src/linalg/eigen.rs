//! Cyclic Jacobi diagonalization of complex Hermitian matrices.
//!
//! Each step zeroes one off-diagonal pair `(p, q)` with the unitary
//! `J = diag(1, e^{-i arg a_pq}) R(theta)`, where the phase factor makes the
//! 2x2 block real symmetric and `R` is the classical real Jacobi rotation.
//! Sweeps run over all pairs in row order until the off-diagonal Frobenius
//! mass drops below [`OFF_DIAGONAL_TOL`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Hermiticity tolerance accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Convergence threshold on the off-diagonal Frobenius norm.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order and the matching unit eigenvectors as columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    /// `V diag(λ) V^dagger`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj()).sum()
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Full spectrum of a Hermitian matrix. The input is symmetrized as
/// `(m + m^dagger)/2` before diagonalization.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    let mut a = checked_hermitian(m)?;
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    jacobi(&mut a, Some(&mut v));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues only; skips eigenvector accumulation.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut a = checked_hermitian(m)?;
    jacobi(&mut a, None);
    let mut ev: Vec<f64> = (0..a.rows()).map(|i| a[(i, i)].re).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Diagonalizes `a` in place without validation and returns its size; the
/// eigenvalues are left unsorted on the diagonal. `a` must be Hermitian.
pub(crate) fn diagonalize_in_place(a: &mut ComplexMatrix) -> usize {
    let n = a.rows();
    if n == 2 {
        let (x, y, b) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)]);
        let mid = 0.5 * (x + y);
        let rad = (0.25 * (x - y) * (x - y) + b.norm_sqr()).sqrt();
        a[(0, 0)] = Complex64::new(mid - rad, 0.0);
        a[(1, 1)] = Complex64::new(mid + rad, 0.0);
        a[(0, 1)] = ZERO;
        a[(1, 0)] = ZERO;
    } else {
        jacobi(a, None);
    }
    n
}

fn checked_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(m.hermitian_part())
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[i * n + j].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

fn jacobi(m: &mut ComplexMatrix, mut v: Option<&mut ComplexMatrix>) {
    let n = m.rows();
    // Below this the absolute threshold is out of reach in double precision.
    let floor = f64::EPSILON * m.frobenius_norm();
    let tol = OFF_DIAGONAL_TOL.max(floor);
    let skip = tol / (4 * n * n) as f64;
    let a = m.data_mut();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a, n) < tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g <= skip {
                    continue;
                }
                let phase = apq / g;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // tan θ for the real symmetric block [[app, g], [g, aqq]]
                let tau = (aqq - app) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // J = [[cs, sn], [-sn e^{-iα}, cs e^{-iα}]] on (p, q)
                let jqp = -phase.conj() * sn;
                let jqq = phase.conj() * cs;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * cs + akq * jqp;
                    a[k * n + q] = akp * sn + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * cs + jqp.conj() * aqk;
                    a[q * n + k] = apk * sn + jqq.conj() * aqk;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * cs + vkq * jqp;
                        v[(k, q)] = vkp * sn + vkq * jqq;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ONE;

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::from_real_diagonal(&[0.75, 0.25]);
        let s = hermitian_eig(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![0.25, 0.75]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let s = hermitian_eig(&x).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&x) < 1e-14);
    }

    #[test]
    fn complex_off_diagonal() {
        // Pauli Y
        let i = Complex64::new(0.0, 1.0);
        let y = ComplexMatrix::new(2, 2, vec![ZERO, -i, i, ZERO]).unwrap();
        let s = hermitian_eig(&y).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&y) < 1e-14);
        assert!(s.eigenvectors.unitarity_defect() < 1e-14);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        assert!(matches!(
            hermitian_eig(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        let m = ComplexMatrix::new(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigenvalues_only_agrees_with_full() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::new(i as f64, 0.0)
            } else if i < j {
                Complex64::new(0.3, 0.1 * (i + j) as f64)
            } else {
                Complex64::new(0.3, -0.1 * (i + j) as f64)
            }
        });
        let full = hermitian_eig(&m).unwrap().eigenvalues;
        let vals = hermitian_eigenvalues(&m).unwrap();
        for (a, b) in full.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
