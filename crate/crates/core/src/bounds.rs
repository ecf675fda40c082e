//! Entropy lower bound for `Φ_dep ⊗ Id` via mutually unbiased conditional
//! ensembles, and the strong-superadditivity experiment for Weyl channels.
//!
//! For a state `ρ` on `H ⊗ K` and a family of `d` bases `{e^s_j}` of `H`, the
//! bound checked by [`verify_bound`] is
//!
//! ```text
//! S((Φ_dep(q) ⊗ Id)(ρ)) >= h(d, q) + (1/d) Σ_s Σ_j q^s_j S(σ^s_j)
//! ```
//!
//! where `q^s_j = Tr((|e^s_j><e^s_j| ⊗ I) ρ)`, `σ^s_j` is the normalized
//! conditional state of `K`, and `h(d, q)` is the minimal output entropy of
//! the depolarizing channel. When every `q^s_j = 1/d` the sum equals
//! `(1/d²) Σ S(d Tr_H((|e^s_j><e^s_j| ⊗ I) ρ))`.

use num_complex::Complex64;
use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::ChannelSpec;
use crate::channel::{apply, tensor_channels, QuantumChannel};
use crate::error::{mismatch, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::mub::{is_prime, mub_family, MubFamily};
use crate::optimize::{estimate_h_hat, OptimizerConfig};
use crate::random::{random_density, random_pure_state, stream};
use crate::state::{partial_trace, von_neumann_entropy, DensityMatrix, TraceOut};
use crate::weyl::{chi_dep_closed_form, depolarizing, lambda_for_params, weyl_channel, WeylParams};

/// Conditional probabilities below this produce an empty placeholder state.
pub const PROB_TOL: f64 = 1e-14;
/// Gap tolerance for the entropy-bound check.
pub const BOUND_TOL: f64 = 1e-9;
/// Gap tolerance for the superadditivity experiment (optimizer slack).
pub const SUPERADD_TOL: f64 = 2e-3;
/// Restart multiplier applied when a superadditivity gap falls below tolerance.
pub const RERUN_FACTOR: usize = 4;

/// Output entropy of the depolarizing channel on any pure input, which is
/// also its constrained roof at every state.
pub fn h_dep_const(d: usize, q: f64) -> Result<f64> {
    chi_dep_closed_form(d, q)
}

/// Measurement of the `H` factor in basis `s` of a [`MubFamily`], with the
/// resulting ensemble on `K`.
#[derive(Clone, Debug)]
pub struct ConditionalEnsemble {
    pub basis_index: usize,
    pub probs: Vec<f64>,
    /// `None` when the outcome probability is below [`PROB_TOL`].
    pub states: Vec<Option<DensityMatrix>>,
}

impl ConditionalEnsemble {
    /// `Σ_j q_j σ_j`
    pub fn average(&self, dim_k: usize) -> ComplexMatrix {
        let mut avg = ComplexMatrix::zeros(dim_k, dim_k);
        for (p, s) in self.probs.iter().zip(&self.states) {
            if let Some(s) = s {
                avg.add_scaled(Complex64::new(*p, 0.0), s.matrix());
            }
        }
        avg
    }

    /// `Σ_j q_j S(σ_j)` over outcomes with nonzero probability.
    pub fn mean_entropy(&self) -> Result<f64> {
        let mut total = 0.0;
        for (p, s) in self.probs.iter().zip(&self.states) {
            if let Some(s) = s {
                total += p * von_neumann_entropy(s)?;
            }
        }
        Ok(total)
    }
}

/// `(<v| ⊗ I) ρ (|v> ⊗ I)`, an unnormalized operator on `K`.
fn conditional_block(rho: &ComplexMatrix, v: &[Complex64], dim_k: usize) -> ComplexMatrix {
    let dh = v.len();
    ComplexMatrix::from_fn(dim_k, dim_k, |a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for h in 0..dh {
            let vh = v[h].conj();
            for g in 0..dh {
                acc += vh * rho[(h * dim_k + a, g * dim_k + b)] * v[g];
            }
        }
        acc
    })
}

/// Conditional ensembles of `K` for every basis of `fam`.
pub fn conditional_ensembles(rho: &DensityMatrix, fam: &MubFamily, dim_k: usize) -> Result<Vec<ConditionalEnsemble>> {
    let d = fam.dim();
    if rho.dim() != d * dim_k {
        return Err(mismatch(format!("{d}*{dim_k}"), rho.dim()));
    }
    fam.bases()
        .iter()
        .enumerate()
        .map(|(s, basis)| {
            let mut probs = Vec::with_capacity(d);
            let mut states = Vec::with_capacity(d);
            for j in 0..d {
                let block = conditional_block(rho.matrix(), &basis.vector(j), dim_k);
                let p = block.trace().re;
                if p < PROB_TOL {
                    probs.push(p.max(0.0));
                    states.push(None);
                } else {
                    probs.push(p);
                    states.push(Some(DensityMatrix::from_unnormalized(block)?));
                }
            }
            Ok(ConditionalEnsemble {
                basis_index: s,
                probs,
                states,
            })
        })
        .collect()
}

/// `(1/d) Σ_s Σ_j q^s_j σ^s_j`; equals `Tr_H ρ` for any family of bases.
pub fn family_average(ensembles: &[ConditionalEnsemble], dim_k: usize) -> ComplexMatrix {
    let mut avg = ComplexMatrix::zeros(dim_k, dim_k);
    let w = Complex64::new(1.0 / ensembles.len() as f64, 0.0);
    for e in ensembles {
        avg.add_scaled(w, &e.average(dim_k));
    }
    avg
}

/// Lower bound `h(d, q) + (1/d) Σ_s Σ_j q^s_j S(σ^s_j)` for `S((Φ_dep(q) ⊗ Id)(ρ))`.
pub fn bound_rhs(rho: &DensityMatrix, q: f64, fam: &MubFamily) -> Result<f64> {
    let d = fam.dim();
    if !is_prime(d) {
        return Err(Error::PrimeDimensionRequired(d));
    }
    if !rho.dim().is_multiple_of(d) {
        return Err(mismatch(format!("multiple of {d}"), rho.dim()));
    }
    let dim_k = rho.dim() / d;
    let ensembles = conditional_ensembles(rho, fam, dim_k)?;
    let mut sum = 0.0;
    for e in &ensembles {
        sum += e.mean_entropy()?;
    }
    Ok(h_dep_const(d, q)? + sum / d as f64)
}

/// `S((Φ_dep(q) ⊗ Id_K)(ρ))`
pub fn bound_lhs(rho: &DensityMatrix, d: usize, q: f64) -> Result<f64> {
    if !rho.dim().is_multiple_of(d) {
        return Err(mismatch(format!("multiple of {d}"), rho.dim()));
    }
    let dim_k = rho.dim() / d;
    let ch = tensor_channels(&depolarizing(d, q)?, &QuantumChannel::identity(dim_k));
    von_neumann_entropy(&apply(&ch, rho)?)
}

/// How a random bipartite test state was drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    /// Haar-random pure state on `H ⊗ K`.
    Pure,
    /// Full-rank Ginibre-induced mixed state.
    Mixed,
    /// `ρ_A ⊗ ρ_B` with independently drawn factors of random rank.
    Product,
}

impl SampleKind {
    /// 40% pure, 40% full rank, 20% product, cycling by sample index.
    pub fn for_index(index: usize) -> Self {
        match index % 5 {
            0 | 1 => Self::Pure,
            2 | 3 => Self::Mixed,
            _ => Self::Product,
        }
    }
}

/// Sample `index` of the seeded random bipartite state sequence.
pub fn random_bipartite(d: usize, dim_k: usize, seed: u64, index: usize) -> Result<(DensityMatrix, SampleKind)> {
    let mut rng = stream(seed, index as u64);
    let kind = SampleKind::for_index(index);
    let n = d * dim_k;
    let rho = match kind {
        SampleKind::Pure => random_pure_state(n, &mut rng)?,
        SampleKind::Mixed => random_density(n, n, &mut rng)?,
        SampleKind::Product => {
            let ra = rng.gen_range(1..=d);
            let rb = rng.gen_range(1..=dim_k);
            let a = random_density(d, ra, &mut rng)?;
            let b = random_density(dim_k, rb, &mut rng)?;
            a.tensor(&b)
        }
    };
    Ok((rho, kind))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundConfig {
    pub d: usize,
    pub q: f64,
    pub dim_k: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl BoundConfig {
    pub fn new(d: usize, q: f64, dim_k: usize, samples: usize, seed: u64) -> Self {
        Self {
            d,
            q,
            dim_k,
            samples,
            seed,
            tolerance: BOUND_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundSample {
    pub sample_index: usize,
    pub kind: SampleKind,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub config: BoundConfig,
    pub samples: Vec<BoundSample>,
    pub min_gap: f64,
    pub violations: usize,
}

/// Checks the entropy lower bound on `cfg.samples` seeded random states.
pub fn verify_bound(cfg: &BoundConfig) -> Result<BoundReport> {
    if !is_prime(cfg.d) {
        return Err(Error::PrimeDimensionRequired(cfg.d));
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidConfig("samples must be >= 1".into()));
    }
    if cfg.dim_k == 0 {
        return Err(Error::InvalidConfig("dimK must be >= 1".into()));
    }
    h_dep_const(cfg.d, cfg.q)?;
    let fam = mub_family(cfg.d)?;

    let one = |i: usize| -> Result<BoundSample> {
        let (rho, kind) = random_bipartite(cfg.d, cfg.dim_k, cfg.seed, i)?;
        let lhs = bound_lhs(&rho, cfg.d, cfg.q)?;
        let rhs = bound_rhs(&rho, cfg.q, &fam)?;
        Ok(BoundSample {
            sample_index: i,
            kind,
            lhs,
            rhs,
            gap: lhs - rhs,
        })
    };
    #[cfg(feature = "parallel")]
    let samples: Vec<_> = (0..cfg.samples).into_par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<_> = (0..cfg.samples).map(one).collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;

    let min_gap = samples.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
    let violations = samples.iter().filter(|s| s.gap < -cfg.tolerance).count();
    Ok(BoundReport {
        config: cfg.clone(),
        samples,
        min_gap,
        violations,
    })
}

/// Source of constrained-roof estimates for the superadditivity experiment.
pub trait RoofEstimator: Sync {
    fn estimate(&self, ch: &QuantumChannel, sigma: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64>;
}

/// The multi-start Stiefel optimizer from [`crate::optimize`].
#[derive(Clone, Copy, Debug, Default)]
pub struct StiefelSearch;

impl RoofEstimator for StiefelSearch {
    fn estimate(&self, ch: &QuantumChannel, sigma: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
        Ok(estimate_h_hat(ch, sigma, cfg)?.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuperaddConfig {
    pub weyl: WeylParams,
    /// Depolarizing parameter `d² p` of the decomposition, echoed for clarity.
    pub q_dep: f64,
    pub psi: ChannelSpec,
    pub dim_k: usize,
    pub samples: usize,
    pub optimizer: OptimizerConfig,
    pub tolerance: f64,
    /// Number of product states used for the equality probe; 0 disables it.
    pub product_probe: usize,
}

impl SuperaddConfig {
    pub fn new(weyl: WeylParams, psi: ChannelSpec, dim_k: usize, samples: usize, optimizer: OptimizerConfig) -> Self {
        Self {
            q_dep: weyl.depolarizing_parameter(),
            weyl,
            psi,
            dim_k,
            samples,
            optimizer,
            tolerance: SUPERADD_TOL,
            product_probe: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuperaddSample {
    pub sample_index: usize,
    pub kind: SampleKind,
    pub lhs_estimate: f64,
    pub rhs_constant: f64,
    pub rhs_hhat_psi: f64,
    pub gap: f64,
    /// Whether the estimates were recomputed with more restarts.
    pub rerun: bool,
    /// Gap still below tolerance after the rerun.
    pub optimizer_failure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuperaddReport {
    pub config: SuperaddConfig,
    pub samples: Vec<SuperaddSample>,
    pub min_gap: f64,
    pub optimizer_failures: usize,
    pub product_equality_residual: Option<f64>,
}

/// SplitMix64 of the combined inputs; gives each (sample, role) its own
/// optimizer seed.
pub fn derive_seed(seed: u64, sample: u64, role: u64) -> u64 {
    let mut z = seed
        .wrapping_add(sample.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(role.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const ROLE_JOINT: u64 = 1;
const ROLE_PSI: u64 = 2;
const ROLE_PROBE_STATE: u64 = 3;

/// Evaluates one sample: `Ĥ_{Φ⊗Ψ}(ρ) - h(d, q_dep) - Ĥ_Ψ(Tr_H ρ)`, rerunning
/// both estimates with [`RERUN_FACTOR`]x restarts if the gap is below
/// `-tolerance`.
#[allow(clippy::too_many_arguments)]
pub fn superadd_sample(
    estimator: &dyn RoofEstimator,
    joint: &QuantumChannel,
    psi: &QuantumChannel,
    rho: &DensityMatrix,
    rhs_constant: f64,
    d: usize,
    optimizer: &OptimizerConfig,
    tolerance: f64,
    sample_index: usize,
    kind: SampleKind,
) -> Result<SuperaddSample> {
    let dim_k = psi.dim_in();
    let marginal = partial_trace(rho, d, dim_k, TraceOut::First)?;
    let joint_cfg = optimizer
        .clone()
        .with_seed(derive_seed(optimizer.seed, sample_index as u64, ROLE_JOINT));
    let psi_cfg = optimizer
        .clone()
        .with_seed(derive_seed(optimizer.seed, sample_index as u64, ROLE_PSI));

    let mut lhs = estimator.estimate(joint, rho, &joint_cfg)?;
    let mut rhs_psi = estimator.estimate(psi, &marginal, &psi_cfg)?;
    let mut gap = lhs - rhs_constant - rhs_psi;
    let mut rerun = false;
    if gap < -tolerance {
        log::info!("sample {sample_index}: gap {gap:.3e} below -{tolerance:e}, rerunning with more restarts");
        rerun = true;
        let more = |c: &OptimizerConfig| c.clone().with_restarts(c.restarts * RERUN_FACTOR);
        lhs = lhs.min(estimator.estimate(joint, rho, &more(&joint_cfg))?);
        rhs_psi = rhs_psi.min(estimator.estimate(psi, &marginal, &more(&psi_cfg))?);
        gap = lhs - rhs_constant - rhs_psi;
    }
    Ok(SuperaddSample {
        sample_index,
        kind,
        lhs_estimate: lhs,
        rhs_constant,
        rhs_hhat_psi: rhs_psi,
        gap,
        rerun,
        optimizer_failure: gap < -tolerance,
    })
}

/// Runs the superadditivity experiment with the default optimizer.
pub fn superadditivity_experiment(cfg: &SuperaddConfig) -> Result<SuperaddReport> {
    superadditivity_experiment_with(&StiefelSearch, cfg)
}

/// Runs the superadditivity experiment with a caller-supplied estimator.
pub fn superadditivity_experiment_with(estimator: &dyn RoofEstimator, cfg: &SuperaddConfig) -> Result<SuperaddReport> {
    let params = WeylParams::new(cfg.weyl.dim, cfg.weyl.shift_weight, cfg.weyl.displacement_weight)?;
    let d = params.dim;
    if !is_prime(d) {
        return Err(Error::PrimeDimensionRequired(d));
    }
    lambda_for_params(&params)?;
    cfg.optimizer.validate()?;
    if cfg.dim_k == 0 {
        return Err(Error::InvalidConfig("dimK must be >= 1".into()));
    }
    let psi = cfg.psi.build(cfg.dim_k)?;
    let phi = weyl_channel(&params)?;
    let joint = tensor_channels(&phi, &psi);
    let q_dep = params.depolarizing_parameter();
    let rhs_constant = h_dep_const(d, q_dep)?;

    let one = |i: usize| -> Result<SuperaddSample> {
        let (rho, kind) = random_bipartite(d, cfg.dim_k, cfg.optimizer.seed, i)?;
        superadd_sample(
            estimator,
            &joint,
            &psi,
            &rho,
            rhs_constant,
            d,
            &cfg.optimizer,
            cfg.tolerance,
            i,
            kind,
        )
    };
    #[cfg(feature = "parallel")]
    let samples: Vec<_> = (0..cfg.samples).into_par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<_> = (0..cfg.samples).map(one).collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;

    let product_equality_residual = if cfg.product_probe > 0 {
        let dep_joint = tensor_channels(&depolarizing(d, q_dep)?, &psi);
        let probe = |i: usize| -> Result<f64> {
            let mut rng = stream(derive_seed(cfg.optimizer.seed, i as u64, ROLE_PROBE_STATE), 0);
            let a = random_density(d, d, &mut rng)?;
            let b = random_density(cfg.dim_k, cfg.dim_k, &mut rng)?;
            let s = superadd_sample(
                estimator,
                &dep_joint,
                &psi,
                &a.tensor(&b),
                rhs_constant,
                d,
                &cfg.optimizer,
                cfg.tolerance,
                cfg.samples + i,
                SampleKind::Product,
            )?;
            Ok(s.gap.abs())
        };
        #[cfg(feature = "parallel")]
        let res: Vec<_> = (0..cfg.product_probe).into_par_iter().map(probe).collect();
        #[cfg(not(feature = "parallel"))]
        let res: Vec<_> = (0..cfg.product_probe).map(probe).collect();
        let res = res.into_iter().collect::<Result<Vec<_>>>()?;
        Some(res.into_iter().fold(0.0, f64::max))
    } else {
        None
    };

    let min_gap = samples.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
    let optimizer_failures = samples.iter().filter(|s| s.optimizer_failure).count();
    Ok(SuperaddReport {
        config: cfg.clone(),
        samples,
        min_gap,
        optimizer_failures,
        product_equality_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_mix_proportions() {
        let kinds: Vec<SampleKind> = (0..10).map(SampleKind::for_index).collect();
        let count = |k| kinds.iter().filter(|&&x| x == k).count();
        assert_eq!(count(SampleKind::Pure), 4);
        assert_eq!(count(SampleKind::Mixed), 4);
        assert_eq!(count(SampleKind::Product), 2);
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, 0, ROLE_JOINT);
        let b = derive_seed(1, 0, ROLE_PSI);
        let c = derive_seed(1, 1, ROLE_JOINT);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, derive_seed(1, 0, ROLE_JOINT));
    }

    #[test]
    fn composite_dimension_rejected() {
        let cfg = BoundConfig::new(4, 0.5, 2, 10, 0);
        assert_eq!(verify_bound(&cfg).unwrap_err(), Error::PrimeDimensionRequired(4));
    }
}
