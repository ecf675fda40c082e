//! Weyl operators and the bistochastic Weyl channel family built from them:
//! depolarizing, q-c (measure in the Fourier basis, then prepare), phase
//! damping and the conditional expectation onto the Fourier-diagonal algebra.
//!
//! The Weyl channel with parameters `(d, r, p)` is
//!
//! ```text
//! Φ(ρ) = (1 - (d-1)(r + d p)) ρ + r Σ_{m≥1} W_{m,0} ρ W_{m,0}^†
//!        + p Σ_{m, n≥1} W_{m,n} ρ W_{m,n}^†
//! ```
//!
//! with `W_{m,n} = Σ_k ω^{kn} |k+m mod d><k|` and `ω = e^{2πi/d}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{mismatch, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::mub::fourier_basis;
use crate::random::{random_density, stream};
use crate::state::DensityMatrix;

/// Slack allowed on the Kraus-weight constraint `(d-1)(r + d p) <= 1`.
pub const WEIGHT_SLACK: f64 = 1e-12;

/// `e^{2πi k / d}`
pub fn root_of_unity(d: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k % d) as f64 / d as f64)
}

/// `W_{m,n} = Σ_k ω^{kn} |k+m mod d><k|`.
pub fn weyl_operator(d: usize, m: usize, n: usize) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::Empty("dimension"));
    }
    if m >= d {
        return Err(Error::IndexOutOfRange {
            name: "m",
            value: m,
            bound: d,
        });
    }
    if n >= d {
        return Err(Error::IndexOutOfRange {
            name: "n",
            value: n,
            bound: d,
        });
    }
    let mut w = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        w[((k + m) % d, k)] = root_of_unity(d, k * n);
    }
    Ok(w)
}

/// Parameters `(d, r, p)` of a bistochastic Weyl channel.
///
/// `shift_weight` is `r`, the weight of each pure shift `W_{m,0}`;
/// `displacement_weight` is `p`, the weight of each `W_{m,n}` with `n >= 1`.
/// The identity term gets whatever is left, `1 - (d-1)(r + d p)`, which must
/// be nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylParams {
    #[serde(rename = "d")]
    pub dim: usize,
    #[serde(rename = "r")]
    pub shift_weight: f64,
    #[serde(rename = "p")]
    pub displacement_weight: f64,
}

impl WeylParams {
    pub fn new(dim: usize, shift_weight: f64, displacement_weight: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::ParameterOutOfRange {
                name: "d",
                value: dim as f64,
                range: ">= 2".into(),
            });
        }
        for (name, v) in [("r", shift_weight), ("p", displacement_weight)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::ParameterOutOfRange {
                    name,
                    value: v,
                    range: ">= 0".into(),
                });
            }
        }
        let params = Self {
            dim,
            shift_weight,
            displacement_weight,
        };
        let load = params.noise_load();
        if load > 1.0 + WEIGHT_SLACK {
            return Err(Error::WeightConstraint(load));
        }
        Ok(params)
    }

    /// `(d-1)(r + d p)`
    pub fn noise_load(&self) -> f64 {
        let d = self.dim as f64;
        (d - 1.0) * (self.shift_weight + d * self.displacement_weight)
    }

    /// Weight of the identity Kraus term.
    pub fn identity_weight(&self) -> f64 {
        (1.0 - self.noise_load()).max(0.0)
    }

    /// Parameter `q = d² p` of the depolarizing channel in the
    /// `Ξ_λ ∘ Φ_dep` decomposition.
    pub fn depolarizing_parameter(&self) -> f64 {
        (self.dim * self.dim) as f64 * self.displacement_weight
    }

    /// Upper end `(1 - d(d-1)p)/d` of the admissible `r` interval for the
    /// depolarizing/q-c mixture decomposition.
    pub fn max_mixture_shift_weight(&self) -> f64 {
        let d = self.dim as f64;
        (1.0 - d * (d - 1.0) * self.displacement_weight) / d
    }
}

/// Kraus weights in the order used by [`weyl_channel`]: identity, then
/// `W_{m,0}` for `m = 1..d`, then `W_{m,n}` for `m = 0..d`, `n = 1..d`.
pub fn weyl_kraus_weights(params: &WeylParams) -> Vec<(usize, usize, f64)> {
    let d = params.dim;
    let mut out = vec![(0, 0, params.identity_weight())];
    out.extend((1..d).map(|m| (m, 0, params.shift_weight)));
    for m in 0..d {
        out.extend((1..d).map(|n| (m, n, params.displacement_weight)));
    }
    out
}

/// The Weyl channel with the given parameters. Zero-weight terms are omitted
/// from the Kraus list.
pub fn weyl_channel(params: &WeylParams) -> Result<QuantumChannel> {
    let params = WeylParams::new(params.dim, params.shift_weight, params.displacement_weight)?;
    let d = params.dim;
    let terms = weyl_kraus_weights(&params)
        .into_iter()
        .map(|(m, n, w)| Ok((w, weyl_operator(d, m, n)?)))
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::from_weighted(d, terms)
}

/// Upper end of the completely positive range of the depolarizing parameter.
pub fn depolarizing_max(d: usize) -> f64 {
    let d2 = (d * d) as f64;
    d2 / (d2 - 1.0)
}

/// `Φ(ρ) = (1-q) ρ + (q/d) I`, realized as the Weyl channel with `r = p = q/d²`.
///
/// Accepts the whole completely positive range `0 <= q <= d²/(d²-1)` and logs
/// a warning when `q > 1`.
pub fn depolarizing(d: usize, q: f64) -> Result<QuantumChannel> {
    check_depolarizing_range(d, q)?;
    if q > 1.0 {
        log::warn!(
            "depolarizing parameter q={q} > 1 (allowed up to {})",
            depolarizing_max(d)
        );
    }
    let w = q / (d * d) as f64;
    weyl_channel(&WeylParams::new(d, w, w)?)
}

pub(crate) fn check_depolarizing_range(d: usize, q: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "d",
            value: d as f64,
            range: ">= 2".into(),
        });
    }
    let hi = depolarizing_max(d);
    if !(0.0..=hi + WEIGHT_SLACK).contains(&q) {
        return Err(Error::ParameterOutOfRange {
            name: "q",
            value: q,
            range: format!("[0, {hi}]"),
        });
    }
    Ok(())
}

/// Minimal output entropy of the depolarizing channel, in bits:
/// `-(1 - (d-1)q/d) log2(1 - (d-1)q/d) - (d-1)(q/d) log2(q/d)`.
pub fn chi_dep_closed_form(d: usize, q: f64) -> Result<f64> {
    check_depolarizing_range(d, q)?;
    let d = d as f64;
    let top = 1.0 - (d - 1.0) * q / d;
    let rest = q / d;
    Ok(-xlog2x(top) - (d - 1.0) * xlog2x(rest))
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `E(ρ) = (1/d) Σ_m W_{m,0} ρ W_{m,0}^†`, which keeps the diagonal of `ρ` in
/// the Fourier basis and discards the rest.
pub fn conditional_expectation(d: usize) -> Result<QuantumChannel> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "d",
            value: d as f64,
            range: ">= 2".into(),
        });
    }
    let w = 1.0 / d as f64;
    let terms = (0..d)
        .map(|m| Ok((w, weyl_operator(d, m, 0)?)))
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::from_weighted(d, terms)
}

/// The q-c channel `Φ(ρ) = Σ_j <e_j|ρ|e_j> ρ_j` with
/// `ρ_j = (1 - (d-1)q/d)|e_j><e_j| + (q/d) Σ_{k≥1} |e_{j+k}><e_{j+k}|`,
/// for `0 <= q <= d/(d-1)`.
pub fn qc_channel(d: usize, q: f64) -> Result<QuantumChannel> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "d",
            value: d as f64,
            range: ">= 2".into(),
        });
    }
    let df = d as f64;
    let hi = df / (df - 1.0);
    if !(0.0..=hi + WEIGHT_SLACK).contains(&q) {
        return Err(Error::ParameterOutOfRange {
            name: "q",
            value: q,
            range: format!("[0, {hi}]"),
        });
    }
    let e = fourier_basis(d)?;
    let stay = (1.0 - (df - 1.0) * q / df).max(0.0);
    let hop = q / df;
    let mut terms = Vec::with_capacity(d * d);
    for j in 0..d {
        let ej = e.vector(j);
        for k in 0..d {
            let weight = if k == 0 { stay } else { hop };
            let target = e.vector((j + k) % d);
            terms.push((weight, ComplexMatrix::outer(&target, &ej)));
        }
    }
    QuantumChannel::from_weighted(d, terms)
}

/// `Ξ(ρ) = ((1 + (d-1)λ)/d) ρ + ((1-λ)/d) Σ_{m≥1} W_{m,0} ρ W_{m,0}^†`.
///
/// `λ = 1` is the identity and `λ = 0` is the conditional expectation.
pub fn phase_damping(d: usize, lambda: f64) -> Result<QuantumChannel> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "d",
            value: d as f64,
            range: ">= 2".into(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
            range: "[0, 1]".into(),
        });
    }
    let df = d as f64;
    let mut terms = vec![((1.0 + (df - 1.0) * lambda) / df, ComplexMatrix::identity(d))];
    for m in 1..d {
        terms.push(((1.0 - lambda) / df, weyl_operator(d, m, 0)?));
    }
    QuantumChannel::from_weighted(d, terms)
}

/// Mixing weight `λ` with `Φ = λ Φ_dep + (1-λ) Φ_qc` (both at `q = d² p`),
/// i.e. `λ = 1 - d(r - p)/(1 - d² p)`.
///
/// Requires `p <= r <= (1 - d(d-1)p)/d` and `1 - d² p > 1e-12`.
pub fn lambda_for_params(params: &WeylParams) -> Result<f64> {
    let d = params.dim as f64;
    let (r, p) = (params.shift_weight, params.displacement_weight);
    let denom = 1.0 - d * d * p;
    let outside = Error::OutsideMixtureRegime { d: params.dim, r, p };
    if denom <= 1e-12 {
        return Err(outside);
    }
    let hi = params.max_mixture_shift_weight();
    if r < p - WEIGHT_SLACK || r > hi + WEIGHT_SLACK {
        return Err(outside);
    }
    Ok((1.0 - d * (r - p) / denom).clamp(0.0, 1.0))
}

/// Unitary `Σ_j e^{iφ_j} |e_j><e_j|`, diagonal in the Fourier basis.
pub fn fourier_diagonal_unitary(phases: &[f64]) -> Result<ComplexMatrix> {
    let d = phases.len();
    let e = fourier_basis(d)?;
    let mut u = ComplexMatrix::zeros(d, d);
    for (j, &phi) in phases.iter().enumerate() {
        let ej = e.vector(j);
        u.add_scaled(Complex64::from_polar(1.0, phi), &ComplexMatrix::outer(&ej, &ej));
    }
    Ok(u)
}

const COVARIANCE_SEED: u64 = 0x5eed_c0de;
const COVARIANCE_SAMPLES: u64 = 20;
const UNITARY_TOL: f64 = 1e-10;

/// `max_ρ max_entry |Φ(UρU^†) - UΦ(ρ)U^†|` over 20 fixed-seed random states.
pub fn covariance_defect(ch: &QuantumChannel, u: &ComplexMatrix) -> Result<f64> {
    if !u.is_square() || u.rows() != ch.dim_in() || ch.dim_in() != ch.dim_out() {
        return Err(mismatch(
            format!("{0}x{0} unitary", ch.dim_in()),
            format!("{}x{}", u.rows(), u.cols()),
        ));
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let d = ch.dim_in();
    let mut worst: f64 = 0.0;
    for i in 0..COVARIANCE_SAMPLES {
        let rho = random_density(d, d, &mut stream(COVARIANCE_SEED, i))?;
        let lhs = ch.apply_matrix(&u.conjugate(rho.matrix()));
        let rhs = u.conjugate(&ch.apply_matrix(rho.matrix()));
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(worst)
}

/// Convenience: the output of a channel on a computational basis state.
pub fn output_on_basis(ch: &QuantumChannel, k: usize) -> Result<ComplexMatrix> {
    let input = DensityMatrix::basis(ch.dim_in(), k)?;
    Ok(ch.apply_matrix(input.matrix()))
}
