use std::sync::atomic::{AtomicUsize, Ordering};

use weylroof::bounds::{superadd_sample, RoofEstimator, SampleKind, StiefelSearch, RERUN_FACTOR, SUPERADD_TOL};
use weylroof::random::{random_density, stream};
use weylroof::{
    depolarizing, h_dep_const, superadditivity_experiment, tensor_channels, ChannelSpec, DensityMatrix, Error,
    OptimizerConfig, QuantumChannel, Result, SuperaddConfig, WeylParams,
};

const H_HALF: f64 = 0.811_278_124_459_132_8;

fn optimizer(restarts: usize) -> OptimizerConfig {
    OptimizerConfig::default().with_restarts(restarts).with_seed(3)
}

#[test]
fn maximally_entangled_with_identity() {
    let psi = QuantumChannel::identity(2);
    let joint = tensor_channels(&depolarizing(2, 0.5).unwrap(), &psi);
    let rho = DensityMatrix::maximally_entangled(2);
    let s = superadd_sample(
        &StiefelSearch,
        &joint,
        &psi,
        &rho,
        H_HALF,
        2,
        &optimizer(2),
        SUPERADD_TOL,
        0,
        SampleKind::Pure,
    )
    .unwrap();
    assert!((s.lhs_estimate - 1.548795).abs() < 1e-6);
    assert!(s.rhs_hhat_psi.abs() < 1e-9);
    assert!((s.gap - 0.737517).abs() < 1e-6);
    assert!(!s.rerun);
}

#[test]
fn complete_depolarization_on_k() {
    let params = WeylParams::new(2, 0.125, 0.125).unwrap();
    let mut cfg = SuperaddConfig::new(params, ChannelSpec::Depolarizing(1.0), 2, 5, optimizer(2));
    cfg.product_probe = 0;
    let report = superadditivity_experiment(&cfg).unwrap();
    for s in &report.samples {
        assert!((s.rhs_hhat_psi - 1.0).abs() < 1e-6);
        assert!(s.gap >= -SUPERADD_TOL);
        assert_eq!(s.gap, s.lhs_estimate - s.rhs_constant - s.rhs_hhat_psi);
    }
    assert!(report.product_equality_residual.is_none());
}

#[test]
fn product_equality_probe() {
    let params = WeylParams::new(2, 0.125, 0.125).unwrap();
    let mut cfg = SuperaddConfig::new(params, ChannelSpec::Depolarizing(0.5), 2, 3, optimizer(4));
    cfg.product_probe = 2;
    let report = superadditivity_experiment(&cfg).unwrap();
    assert!(report.product_equality_residual.unwrap() <= SUPERADD_TOL);
    assert!((report.config.q_dep - 0.5).abs() < 1e-15);
    assert_eq!(report.samples[0].rhs_constant, h_dep_const(2, 0.5).unwrap());
    assert_eq!(report.optimizer_failures, 0);
}

#[test]
fn reports_are_deterministic() {
    let params = WeylParams::new(2, 0.2, 0.05).unwrap();
    let cfg = SuperaddConfig::new(params, ChannelSpec::Qc(0.5), 2, 5, optimizer(2));
    assert_eq!(
        superadditivity_experiment(&cfg).unwrap(),
        superadditivity_experiment(&cfg).unwrap()
    );
}

#[test]
fn regime_is_enforced() {
    let cfg = |params| SuperaddConfig::new(params, ChannelSpec::Identity, 2, 1, optimizer(1));
    // r < p
    let err = superadditivity_experiment(&cfg(WeylParams::new(3, 0.01, 0.05).unwrap())).unwrap_err();
    assert!(matches!(err, Error::OutsideMixtureRegime { .. }));
    let err = superadditivity_experiment(&cfg(WeylParams::new(4, 0.05, 0.01).unwrap())).unwrap_err();
    assert_eq!(err, Error::PrimeDimensionRequired(4));
    let mut bad = cfg(WeylParams::new(2, 0.125, 0.125).unwrap());
    bad.optimizer.restarts = 0;
    assert!(superadditivity_experiment(&bad).is_err());
}

/// Overestimates the roof of the single-system channel by one bit until asked
/// for at least `honest_from` restarts, like a search stuck in a poor basin.
struct Pessimist {
    honest_from: usize,
    calls: AtomicUsize,
}

impl RoofEstimator for Pessimist {
    fn estimate(&self, ch: &QuantumChannel, sigma: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let value = StiefelSearch.estimate(ch, sigma, cfg)?;
        if ch.dim_in() == 2 && cfg.restarts < self.honest_from {
            return Ok(value + 1.0);
        }
        Ok(value)
    }
}

fn product_sample(estimator: &dyn RoofEstimator) -> weylroof::bounds::SuperaddSample {
    let psi = depolarizing(2, 0.5).unwrap();
    let joint = tensor_channels(&depolarizing(2, 0.5).unwrap(), &psi);
    let mut rng = stream(8, 0);
    let rho = random_density(2, 2, &mut rng)
        .unwrap()
        .tensor(&random_density(2, 2, &mut rng).unwrap());
    superadd_sample(
        estimator,
        &joint,
        &psi,
        &rho,
        H_HALF,
        2,
        &optimizer(2),
        SUPERADD_TOL,
        0,
        SampleKind::Product,
    )
    .unwrap()
}

#[test]
fn negative_gap_triggers_rerun() {
    let est = Pessimist {
        honest_from: 2 * RERUN_FACTOR,
        calls: AtomicUsize::new(0),
    };
    let s = product_sample(&est);
    assert!(s.rerun);
    assert!(!s.optimizer_failure);
    assert!(s.gap >= -SUPERADD_TOL);
    assert_eq!(est.calls.load(Ordering::Relaxed), 4);
}

#[test]
fn persistent_negative_gap_is_an_optimizer_failure() {
    let est = Pessimist {
        honest_from: usize::MAX,
        calls: AtomicUsize::new(0),
    };
    let s = product_sample(&est);
    assert!(s.rerun);
    assert!(s.optimizer_failure);
    assert!(s.gap < -SUPERADD_TOL);
}

#[test]
fn healthy_estimates_skip_the_rerun() {
    let est = Pessimist {
        honest_from: 0,
        calls: AtomicUsize::new(0),
    };
    let s = product_sample(&est);
    assert!(!s.rerun);
    assert_eq!(est.calls.load(Ordering::Relaxed), 2);
}
