//! Multi-start minimization of average output entropy over ensembles with a
//! fixed average state, and of output entropy over pure inputs.
//!
//! Local refinement runs cyclic sweeps over pairs of Stiefel rows. For each
//! pair `(j, l)` and each of the two phases `φ ∈ {0, π/2}` the rotation
//!
//! ```text
//! row_j <- c row_j + s e^{iφ} row_l
//! row_l <- -s e^{-iφ} row_j + c row_l
//! ```
//!
//! is line-searched in the angle. Only members `j` and `l` change, and their
//! channel outputs are quadratic in `(c, s)`:
//! `X_j = c²A + s²B + cs D`, `X_l = s²A + c²B - cs D` with `A = Φ(ψ̃_j ψ̃_j^†)`,
//! `B = Φ(ψ̃_l ψ̃_l^†)` and `D = e^{-iφ} Φ(ψ̃_j ψ̃_l^†) + h.c.`, so each trial
//! angle costs two small eigenvalue problems.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply, QuantumChannel};
use crate::ensemble::{average_output_entropy, ensemble_from_rows, Ensemble, StiefelPoint, Support};
use crate::error::{mismatch, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::random::{haar_isometry, haar_vector, stream};
use crate::state::{von_neumann_entropy, weighted_entropy, weighted_entropy_in_place, DensityMatrix};

/// Number of ensemble members. Serialized as `"auto"` or an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SizeRepr", try_from = "SizeRepr")]
pub enum EnsembleSize {
    /// `rank(σ)²`
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SizeRepr {
    Fixed(usize),
    Named(String),
}

impl From<EnsembleSize> for SizeRepr {
    fn from(k: EnsembleSize) -> Self {
        match k {
            EnsembleSize::Auto => SizeRepr::Named("auto".into()),
            EnsembleSize::Fixed(n) => SizeRepr::Fixed(n),
        }
    }
}

impl TryFrom<SizeRepr> for EnsembleSize {
    type Error = String;

    fn try_from(r: SizeRepr) -> std::result::Result<Self, String> {
        match r {
            SizeRepr::Fixed(n) => Ok(EnsembleSize::Fixed(n)),
            SizeRepr::Named(s) if s == "auto" => Ok(EnsembleSize::Auto),
            SizeRepr::Named(s) => Err(format!("k must be an integer or \"auto\", got {s:?}")),
        }
    }
}

impl std::str::FromStr for EnsembleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(EnsembleSize::Auto);
        }
        s.parse()
            .map(EnsembleSize::Fixed)
            .map_err(|_| Error::InvalidConfig(format!("k must be an integer or \"auto\", got {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OptimizerConfig {
    pub k: EnsembleSize,
    pub restarts: usize,
    pub max_iters: usize,
    pub obj_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            k: EnsembleSize::Auto,
            restarts: 32,
            max_iters: 500,
            obj_tol: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("maxIters must be >= 1".into()));
        }
        if self.obj_tol.is_nan() || self.obj_tol <= 0.0 {
            return Err(Error::InvalidConfig("objTol must be > 0".into()));
        }
        if self.k == EnsembleSize::Fixed(0) {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        Ok(())
    }

    fn ensemble_size(&self, rank: usize) -> Result<usize> {
        match self.k {
            EnsembleSize::Auto => Ok(rank * rank),
            EnsembleSize::Fixed(k) if k >= rank => Ok(k),
            EnsembleSize::Fixed(k) => Err(Error::InvalidConfig(format!(
                "k = {k} is smaller than rank(sigma) = {rank}"
            ))),
        }
    }
}

/// Result of [`estimate_h_hat`]: an upper estimate of the constrained
/// output-entropy roof together with the ensemble achieving it.
#[derive(Clone, Debug, Serialize)]
pub struct HhatEstimate {
    pub value: f64,
    pub best_ensemble: Ensemble,
    /// Final value of each restart, in restart order.
    pub trace: Vec<f64>,
    /// Total sweeps across restarts.
    pub iterations: usize,
}

/// Minimizes `Σ π_j S(Φ(ρ_j))` over pure-state ensembles averaging to `sigma`.
///
/// Besides the random restarts, the singleton `{σ}` and the eigen-ensemble of
/// `σ` are always evaluated, so the result never exceeds `S(Φ(σ))`.
pub fn estimate_h_hat(ch: &QuantumChannel, sigma: &DensityMatrix, cfg: &OptimizerConfig) -> Result<HhatEstimate> {
    cfg.validate()?;
    if sigma.dim() != ch.dim_in() {
        return Err(mismatch(ch.dim_in(), sigma.dim()));
    }
    let sigma = DensityMatrix::new(sigma.matrix().clone())?;

    let singleton = Ensemble::singleton(sigma.clone());
    let singleton_value = von_neumann_entropy(&apply(ch, &sigma)?)?;
    let support = Support::of(&sigma);
    let r = support.rank();
    if r == 1 {
        return Ok(HhatEstimate {
            value: singleton_value,
            best_ensemble: singleton,
            trace: vec![singleton_value; cfg.restarts],
            iterations: 0,
        });
    }
    let k = cfg.ensemble_size(r)?;
    let problem = RoofProblem::new(ch, &support);

    let eigen = ensemble_from_rows(&support, StiefelPoint::canonical(k, r).matrix())?;
    let eigen_value = average_output_entropy(ch, &eigen)?;

    let run = |i: usize| -> Result<(f64, Ensemble, usize)> {
        let mut rng = stream(cfg.seed, i as u64);
        let start = haar_isometry(k, r, &mut rng);
        let (m, sweeps) = problem.refine(start, cfg);
        let ens = ensemble_from_rows(&support, &m)?;
        let value = average_output_entropy(ch, &ens)?;
        Ok((value, ens, sweeps))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = (0..cfg.restarts).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = (0..cfg.restarts).map(run).collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let trace: Vec<f64> = results.iter().map(|(v, _, _)| *v).collect();
    let iterations = results.iter().map(|(_, _, s)| s).sum();

    let (mut value, mut best_ensemble) = (singleton_value, singleton);
    if eigen_value < value {
        value = eigen_value;
        best_ensemble = eigen;
    }
    for (v, ens, _) in results {
        if v < value {
            value = v;
            best_ensemble = ens;
        }
    }
    Ok(HhatEstimate {
        value,
        best_ensemble,
        trace,
        iterations,
    })
}

/// Result of [`estimate_chi`].
#[derive(Clone, Debug, Serialize)]
pub struct ChiEstimate {
    pub value: f64,
    pub best_input: DensityMatrix,
    pub trace: Vec<f64>,
}

/// Minimizes `S(Φ(|ψ><ψ|))` over unit vectors; pure inputs suffice since the
/// entropy is concave and `Φ` is linear.
pub fn estimate_chi(ch: &QuantumChannel, cfg: &OptimizerConfig) -> Result<ChiEstimate> {
    cfg.validate()?;
    let d = ch.dim_in();
    let transfer = ch.transfer_matrix();
    let dout = ch.dim_out();
    let objective = |psi: &[Complex64]| -> f64 {
        let x = apply_rank_one(&transfer, dout, psi, psi);
        weighted_entropy(&x)
    };

    let run = |i: usize| -> (f64, Vec<Complex64>) {
        let mut rng = stream(cfg.seed, i as u64);
        let mut psi = haar_vector(d, &mut rng);
        let mut current = objective(&psi);
        for _ in 0..cfg.max_iters {
            let before = current;
            for a in 0..d {
                for b in a + 1..d {
                    for phase in [0.0, FRAC_PI_2] {
                        let rotated = |theta: f64| rotate_pair(&psi, a, b, theta, phase);
                        let (theta, val) = line_minimize(|t| objective(&rotated(t)), -FRAC_PI_2, FRAC_PI_2, 12);
                        if val < current {
                            psi = rotated(theta);
                            current = val;
                        }
                    }
                }
            }
            if before - current < cfg.obj_tol {
                break;
            }
        }
        (current, psi)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = (0..cfg.restarts).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = (0..cfg.restarts).map(run).collect();

    let mut best = 0;
    let mut trace = Vec::with_capacity(results.len());
    for (i, (_, psi)) in results.iter().enumerate() {
        let exact = von_neumann_entropy(&apply(ch, &DensityMatrix::pure(psi)?)?)?;
        trace.push(exact);
        if exact < trace[best] {
            best = i;
        }
    }
    Ok(ChiEstimate {
        value: trace[best],
        best_input: DensityMatrix::pure(&results[best].1)?,
        trace,
    })
}

fn rotate_pair(psi: &[Complex64], a: usize, b: usize, theta: f64, phase: f64) -> Vec<Complex64> {
    let (s, c) = theta.sin_cos();
    let e = Complex64::from_polar(1.0, phase);
    let mut out = psi.to_vec();
    out[a] = psi[a] * c + psi[b] * e * s;
    out[b] = -psi[a] * e.conj() * s + psi[b] * c;
    out
}

/// `Φ(|a><b|)` through the transfer matrix.
fn apply_rank_one(transfer: &ComplexMatrix, dout: usize, a: &[Complex64], b: &[Complex64]) -> ComplexMatrix {
    let v = ComplexMatrix::outer(a, b).into_vec();
    ComplexMatrix::from_vec_unchecked(dout, dout, transfer.mul_vec(&v))
}

const GOLDEN_TOL: f64 = 1e-6;

/// Coarse grid over `[lo, hi)` followed by golden-section search around the
/// best grid point. Returns the best `(x, f(x))` seen, including `f(0)` when
/// `0` lies on the grid.
fn line_minimize(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
    let h = (hi - lo) / grid as f64;
    let (mut best_x, mut best_f) = (lo, f(lo));
    for i in 1..grid {
        let x = lo + i as f64 * h;
        let fx = f(x);
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_x - h, best_x + h);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

/// Channel and support data shared by all restarts.
struct RoofProblem<'a> {
    transfer: ComplexMatrix,
    dout: usize,
    support: &'a Support,
}

impl<'a> RoofProblem<'a> {
    fn new(ch: &QuantumChannel, support: &'a Support) -> Self {
        Self {
            transfer: ch.transfer_matrix(),
            dout: ch.dim_out(),
            support,
        }
    }

    fn output(&self, a: &[Complex64], b: &[Complex64]) -> ComplexMatrix {
        apply_rank_one(&self.transfer, self.dout, a, b)
    }

    /// Runs sweeps until the improvement over a sweep drops below `obj_tol`.
    /// Returns the refined coordinates and the number of sweeps.
    fn refine(&self, mut m: ComplexMatrix, cfg: &OptimizerConfig) -> (ComplexMatrix, usize) {
        let k = m.rows();
        let n = self.dout;
        let mut members: Vec<Vec<Complex64>> = (0..k).map(|j| self.support.member(m.row(j))).collect();
        let mut outputs: Vec<ComplexMatrix> = members.iter().map(|v| self.output(v, v)).collect();
        let mut terms: Vec<f64> = outputs.iter().map(weighted_entropy).collect();
        let mut total: f64 = terms.iter().sum();
        // per-move share of the sweep tolerance
        let negligible = cfg.obj_tol / (k * (k - 1)).max(1) as f64;

        let mut mid = ComplexMatrix::zeros(n, n);
        let mut half_diff = ComplexMatrix::zeros(n, n);
        let mut half_cross = ComplexMatrix::zeros(n, n);
        let mut xj = ComplexMatrix::zeros(n, n);
        let mut xl = ComplexMatrix::zeros(n, n);

        let mut sweeps = 0;
        while sweeps < cfg.max_iters {
            sweeps += 1;
            for j in 0..k {
                for l in j + 1..k {
                    for phase in [0.0, FRAC_PI_2] {
                        // X_j(θ) = M + cos2θ P + sin2θ Q, X_l(θ) = M - cos2θ P - sin2θ Q
                        let cross = self.output(&members[j], &members[l]);
                        let e = Complex64::from_polar(0.5, -phase);
                        for r in 0..n {
                            for c in 0..n {
                                let (a, b) = (outputs[j][(r, c)], outputs[l][(r, c)]);
                                mid[(r, c)] = (a + b) * 0.5;
                                half_diff[(r, c)] = (a - b) * 0.5;
                                half_cross[(r, c)] = e * cross[(r, c)] + (e * cross[(c, r)]).conj();
                            }
                        }
                        let mut cost = |theta: f64| {
                            let (s2, c2) = (2.0 * theta).sin_cos();
                            let (md, pd, qd) = (mid.data(), half_diff.data(), half_cross.data());
                            for (i, (xa, xb)) in xj.data_mut().iter_mut().zip(xl.data_mut()).enumerate() {
                                let v = pd[i] * c2 + qd[i] * s2;
                                *xa = md[i] + v;
                                *xb = md[i] - v;
                            }
                            weighted_entropy_in_place(&mut xj) + weighted_entropy_in_place(&mut xl)
                        };
                        let base = terms[j] + terms[l];
                        let Some((theta, val)) = pair_search(&mut cost, base, sweeps, negligible) else {
                            continue;
                        };
                        if val < base - 1e-15 {
                            let (s, c) = theta.sin_cos();
                            let ph = Complex64::from_polar(1.0, phase);
                            let (rj, rl) = (m.row(j).to_vec(), m.row(l).to_vec());
                            for col in 0..m.cols() {
                                m[(j, col)] = rj[col] * c + rl[col] * ph * s;
                                m[(l, col)] = -rj[col] * ph.conj() * s + rl[col] * c;
                            }
                            members[j] = self.support.member(m.row(j));
                            members[l] = self.support.member(m.row(l));
                            outputs[j] = self.output(&members[j], &members[j]);
                            outputs[l] = self.output(&members[l], &members[l]);
                            terms[j] = weighted_entropy(&outputs[j]);
                            terms[l] = weighted_entropy(&outputs[l]);
                        }
                    }
                }
            }
            let new_total: f64 = terms.iter().sum();
            let improvement = total - new_total;
            total = new_total;
            if improvement < cfg.obj_tol {
                break;
            }
        }
        (m, sweeps)
    }
}

/// Sweeps that always run the full grid search on every pair.
const WARMUP_SWEEPS: usize = 2;
/// Finite-difference step for the local model.
const PROBE_STEP: f64 = 1e-3;

/// Line search for one rotation pair with `cost(0) = base`. After the warmup
/// sweeps, a three-point parabola around `0` decides whether the pair is
/// skipped (`None`), moved by the parabola's vertex, or searched globally.
fn pair_search(cost: &mut impl FnMut(f64) -> f64, base: f64, sweep: usize, negligible: f64) -> Option<(f64, f64)> {
    if sweep > WARMUP_SWEEPS {
        let (fm, fp) = (cost(-PROBE_STEP), cost(PROBE_STEP));
        let slope = (fp - fm) / (2.0 * PROBE_STEP);
        let curv = (fp - 2.0 * base + fm) / (PROBE_STEP * PROBE_STEP);
        if curv > 0.0 {
            let drop = slope * slope / (2.0 * curv);
            if drop < negligible && fm >= base && fp >= base {
                return None;
            }
            let vertex = -slope / curv;
            if vertex.abs() < FRAC_PI_4 / 8.0 {
                let fv = cost(vertex);
                let best = [(vertex, fv), (-PROBE_STEP, fm), (PROBE_STEP, fp)]
                    .into_iter()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                if best.1 < base {
                    return Some(best);
                }
            }
        }
    }
    Some(line_minimize(cost, -FRAC_PI_4, FRAC_PI_4, 8))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_minimize_finds_interior_minimum() {
        let (x, fx) = line_minimize(|t| (t - 0.3).powi(2), -1.0, 1.0, 8);
        assert!((x - 0.3).abs() < 1e-5);
        assert!(fx < 1e-10);
    }

    #[test]
    fn config_validation() {
        let mut cfg = OptimizerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.restarts = 0;
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig {
            obj_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig {
            k: EnsembleSize::Fixed(1),
            ..Default::default()
        };
        assert!(cfg.ensemble_size(2).is_err());
        assert_eq!(OptimizerConfig::default().ensemble_size(3).unwrap(), 9);
    }

    #[test]
    fn rotation_is_unitary() {
        let psi = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let out = rotate_pair(&psi, 0, 1, 0.7, FRAC_PI_2);
        let n: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-15);
    }
}
