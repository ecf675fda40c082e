//! Ensembles of states and their isometry (Stiefel) coordinates.
//!
//! Every pure-state ensemble averaging to `σ = Σ_i λ_i |v_i><v_i|` (rank `r`)
//! with `k` members arises as `|ψ̃_j> = Σ_i M_{j,i} sqrt(λ_i) |v_i>` for some
//! `k x r` matrix `M` with orthonormal columns; the weights are `π_j = <ψ̃_j|ψ̃_j>`.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{apply, QuantumChannel};
use crate::error::{mismatch, Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::state::{von_neumann_entropy, DensityMatrix, STATE_TOL};

/// Eigenvalues of `σ` at or below this are discarded when computing its rank.
pub const RANK_TOL: f64 = 1e-12;
/// Ensemble members with weight below this are dropped.
pub const WEIGHT_TOL: f64 = 1e-14;

/// Probability-weighted list of states.
#[derive(Clone, Debug, Serialize)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(mismatch(format!("{} weights", states.len()), weights.len()));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(mismatch(dim, s.dim()));
        }
        if let Some(&w) = weights.iter().find(|&&w| w.is_nan() || w <= 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "weight",
                value: w,
                range: "(0, 1]".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::BadTrace(total));
        }
        Ok(Self { weights, states })
    }

    pub fn singleton(state: DensityMatrix) -> Self {
        Self {
            weights: vec![1.0],
            states: vec![state],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    /// `Σ π_j ρ_j`
    pub fn average(&self) -> ComplexMatrix {
        let mut avg = ComplexMatrix::zeros(self.dim(), self.dim());
        for (w, s) in self.weights.iter().zip(&self.states) {
            avg.add_scaled(Complex64::new(*w, 0.0), s.matrix());
        }
        avg
    }
}

/// `k x r` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StiefelPoint {
    m: ComplexMatrix,
}

impl StiefelPoint {
    /// Accepts `m` if `m^dagger m = I_r` within 1e-10.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.cols() > m.rows() {
            return Err(Error::NotOrthonormal(f64::INFINITY));
        }
        let defect = m.unitarity_defect();
        if defect > 1e-10 {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self { m })
    }

    /// The first `r` columns of the `k x k` identity.
    pub fn canonical(k: usize, r: usize) -> Self {
        Self {
            m: ComplexMatrix::from_fn(k, r, |i, j| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn k(&self) -> usize {
        self.m.rows()
    }

    pub fn r(&self) -> usize {
        self.m.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    #[cfg(test)]
    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self { m }
    }
}

/// Eigen-data of a fixed average state: the scaled eigenvectors
/// `sqrt(λ_i) v_i` of its support, as columns of a `d x r` matrix.
#[derive(Clone, Debug)]
pub struct Support {
    scaled: ComplexMatrix,
}

impl Support {
    pub fn of(sigma: &DensityMatrix) -> Self {
        let spec = hermitian_eig(sigma.matrix()).expect("validated state is Hermitian");
        let d = sigma.dim();
        // descending order, largest weight first
        let kept: Vec<usize> = (0..d).rev().filter(|&i| spec.eigenvalues[i] > RANK_TOL).collect();
        let scaled = ComplexMatrix::from_fn(d, kept.len(), |row, c| {
            let i = kept[c];
            spec.eigenvectors[(row, i)] * spec.eigenvalues[i].sqrt()
        });
        Self { scaled }
    }

    pub fn rank(&self) -> usize {
        self.scaled.cols()
    }

    pub fn dim(&self) -> usize {
        self.scaled.rows()
    }

    /// Unnormalized member vector `ψ̃ = Σ_i coords_i sqrt(λ_i) v_i`.
    pub fn member(&self, coords: &[Complex64]) -> Vec<Complex64> {
        self.scaled.mul_vec(coords)
    }
}

/// Ensemble obtained from Stiefel coordinates `m` for the average state `sigma`.
pub fn ensemble_from_stiefel(sigma: &DensityMatrix, m: &StiefelPoint) -> Result<Ensemble> {
    let support = Support::of(sigma);
    if m.r() != support.rank() {
        return Err(mismatch(format!("r = rank(sigma) = {}", support.rank()), m.r()));
    }
    let defect = m.matrix().unitarity_defect();
    if defect > 1e-10 {
        return Err(Error::NotOrthonormal(defect));
    }
    ensemble_from_rows(&support, m.matrix())
}

pub(crate) fn ensemble_from_rows(support: &Support, m: &ComplexMatrix) -> Result<Ensemble> {
    let mut weights = Vec::with_capacity(m.rows());
    let mut states = Vec::with_capacity(m.rows());
    for j in 0..m.rows() {
        let psi = support.member(m.row(j));
        let w: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if w < WEIGHT_TOL {
            continue;
        }
        weights.push(w);
        states.push(DensityMatrix::pure(&psi)?);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ensemble::new(weights, states)
}

/// `Σ_j π_j S(Φ(ρ_j))`, in bits.
pub fn average_output_entropy(ch: &QuantumChannel, ens: &Ensemble) -> Result<f64> {
    if ens.dim() != ch.dim_in() {
        return Err(mismatch(ch.dim_in(), ens.dim()));
    }
    let mut total = 0.0;
    for (w, s) in ens.weights().iter().zip(ens.states()) {
        total += w * von_neumann_entropy(&apply(ch, s)?)?;
    }
    Ok(total)
}
