use std::fmt::Write as _;

use serde_json::{json, Value};
use weylroof::bounds::derive_seed;
use weylroof::random::{random_density, random_pure_state, stream};
use weylroof::weyl::weyl_kraus_weights;
use weylroof::{
    apply, choi, compose, depolarizing, estimate_h_hat, h_dep_const, lambda_for_params, phase_damping, qc_channel,
    superadditivity_experiment, verify_bound, von_neumann_entropy, weyl_channel, BoundConfig, ChoiMatrix,
    DensityMatrix, SuperaddConfig, WeylParams,
};

use crate::args::StateKind;
use crate::config::{HhatConfig, RunConfig};
use crate::report::{num, Summary, Table};

/// Result of running one configuration, before it is wrapped into a report.
pub struct Outcome {
    pub rows: Vec<Value>,
    pub table: Table,
    pub summary: Summary,
    /// Human-readable summary.
    pub text: String,
}

pub fn execute(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    match cfg {
        RunConfig::ChannelShow(p) => channel_show(p),
        RunConfig::VerifyBound(c) => bound_check(c),
        RunConfig::Hhat(c) => hhat(c),
        RunConfig::Superadd(c) => superadd(c),
    }
}

fn channel_show(params: &WeylParams) -> anyhow::Result<Outcome> {
    let params = WeylParams::new(params.dim, params.shift_weight, params.displacement_weight)?;
    let d = params.dim;
    let ch = weyl_channel(&params)?;
    let target = choi(&ch);
    let q = params.depolarizing_parameter();

    let weights = weyl_kraus_weights(&params);
    let rows = weights
        .iter()
        .map(|&(m, n, w)| json!({"m": m, "n": n, "weight": w}))
        .collect();
    let table = Table {
        header: vec!["m", "n", "weight"],
        rows: weights
            .iter()
            .map(|&(m, n, w)| vec![m.to_string(), n.to_string(), num(w)])
            .collect(),
    };

    let tp = ch.tp_defect();
    let choi_min = target.min_eigenvalue();
    let lambda = lambda_for_params(&params).ok();
    let (mixture, composition) = match lambda {
        Some(l) => {
            let dep = depolarizing(d, q)?;
            let mix = ChoiMatrix::combination(&[(l, &choi(&dep)), (1.0 - l, &choi(&qc_channel(d, q)?))]);
            let chain = compose(&phase_damping(d, l)?, &dep)?;
            (Some(target.distance(&mix)), Some(target.distance(&choi(&chain))))
        }
        None => (None, None),
    };

    let mut text = String::new();
    writeln!(
        text,
        "Weyl channel d={d} r={} p={} (q_dep = {q})",
        params.shift_weight, params.displacement_weight
    )?;
    writeln!(text, "identity weight      {:.9}", params.identity_weight())?;
    writeln!(text, "shift weight         {:.9} x {}", params.shift_weight, d - 1)?;
    writeln!(
        text,
        "displacement weight  {:.9} x {}",
        params.displacement_weight,
        d * (d - 1)
    )?;
    writeln!(text, "tp defect            {tp:.3e}")?;
    writeln!(text, "choi min eigenvalue  {choi_min:.3e}")?;
    match (lambda, mixture, composition) {
        (Some(l), Some(m), Some(c)) => {
            writeln!(text, "lambda               {l:.9}")?;
            writeln!(text, "mixture residual     {m:.3e}")?;
            writeln!(text, "composition residual {c:.3e}")?;
        }
        _ => writeln!(text, "lambda               outside regime")?,
    }

    let diagnostics = json!({
        "qDep": q,
        "identityWeight": params.identity_weight(),
        "tpDefect": tp,
        "choiMinEigenvalue": choi_min,
        "lambda": lambda,
        "mixtureResidual": mixture,
        "compositionResidual": composition,
    });
    Ok(Outcome {
        rows,
        table,
        summary: Summary {
            diagnostics: Some(diagnostics),
            ..Summary::default()
        },
        text,
    })
}

fn bound_check(cfg: &BoundConfig) -> anyhow::Result<Outcome> {
    let report = verify_bound(cfg)?;
    let rows = report
        .samples
        .iter()
        .map(serde_json::to_value)
        .collect::<Result<_, _>>()?;
    let table = Table {
        header: vec!["sample", "lhs", "rhs", "gap"],
        rows: report
            .samples
            .iter()
            .map(|s| vec![s.sample_index.to_string(), num(s.lhs), num(s.rhs), num(s.gap)])
            .collect(),
    };
    let mut text = String::new();
    writeln!(
        text,
        "entropy bound, d={} q={} dimK={}: {} samples, min gap {:.6e}, {} violations at tolerance {:e}",
        cfg.d,
        cfg.q,
        cfg.dim_k,
        report.samples.len(),
        report.min_gap,
        report.violations,
        cfg.tolerance
    )?;
    Ok(Outcome {
        rows,
        table,
        summary: Summary {
            min_gap: Some(report.min_gap),
            violations: report.violations,
            ..Summary::default()
        },
        text,
    })
}

/// Stream index for the random input state, kept apart from the restart streams.
const STATE_ROLE: u64 = 0x57a7e;

fn hhat(cfg: &HhatConfig) -> anyhow::Result<Outcome> {
    let ch = cfg.channel.build(cfg.d)?;
    let mut rng = stream(derive_seed(cfg.optimizer.seed, 0, STATE_ROLE), 0);
    let sigma = match cfg.state {
        StateKind::Random => random_density(cfg.d, cfg.d, &mut rng)?,
        StateKind::Pure => random_pure_state(cfg.d, &mut rng)?,
        StateKind::Maxmixed => DensityMatrix::maximally_mixed(cfg.d),
    };
    let est = estimate_h_hat(&ch, &sigma, &cfg.optimizer)?;
    let singleton = von_neumann_entropy(&apply(&ch, &sigma)?)?;

    let rows = est
        .trace
        .iter()
        .enumerate()
        .map(|(i, v)| json!({"restart": i, "value": v}))
        .collect();
    let table = Table {
        header: vec!["restart", "value"],
        rows: est
            .trace
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), num(*v)])
            .collect(),
    };
    let mut text = String::new();
    writeln!(
        text,
        "channel {} on d={}, {} state",
        cfg.channel,
        cfg.d,
        format!("{:?}", cfg.state).to_lowercase()
    )?;
    writeln!(text, "roof estimate        {:.9}", est.value)?;
    writeln!(text, "S(channel(sigma))    {singleton:.9}")?;
    writeln!(text, "ensemble members     {}", est.best_ensemble.len())?;
    writeln!(text, "sweeps               {}", est.iterations)?;

    let diagnostics = json!({
        "value": est.value,
        "singletonEntropy": singleton,
        "members": est.best_ensemble.len(),
        "weights": est.best_ensemble.weights(),
        "iterations": est.iterations,
    });
    Ok(Outcome {
        rows,
        table,
        summary: Summary {
            diagnostics: Some(diagnostics),
            ..Summary::default()
        },
        text,
    })
}

fn superadd(cfg: &SuperaddConfig) -> anyhow::Result<Outcome> {
    let report = superadditivity_experiment(cfg)?;
    let d = cfg.weyl.dim;
    let residual = report.product_equality_residual;
    let residual_violation = residual.is_some_and(|r| r > cfg.tolerance);
    let violations = report.optimizer_failures + usize::from(residual_violation);

    let rows = report
        .samples
        .iter()
        .map(serde_json::to_value)
        .collect::<Result<_, _>>()?;
    let table = Table {
        header: vec![
            "sample",
            "kind",
            "lhsEstimate",
            "rhsConstant",
            "rhsHhatPsi",
            "gap",
            "rerun",
            "optimizerFailure",
        ],
        rows: report
            .samples
            .iter()
            .map(|s| {
                vec![
                    s.sample_index.to_string(),
                    format!("{:?}", s.kind).to_lowercase(),
                    num(s.lhs_estimate),
                    num(s.rhs_constant),
                    num(s.rhs_hhat_psi),
                    num(s.gap),
                    s.rerun.to_string(),
                    s.optimizer_failure.to_string(),
                ]
            })
            .collect(),
    };
    let reruns = report.samples.iter().filter(|s| s.rerun).count();
    let mut text = String::new();
    writeln!(
        text,
        "superadditivity, Weyl d={d} r={} p={} (q_dep = {}) with psi {} on dimK={}",
        cfg.weyl.shift_weight, cfg.weyl.displacement_weight, cfg.q_dep, cfg.psi, cfg.dim_k
    )?;
    writeln!(
        text,
        "{} samples, min gap {:.6e}, {reruns} reruns, {} optimizer failures",
        report.samples.len(),
        report.min_gap,
        report.optimizer_failures
    )?;
    if let Some(r) = residual {
        writeln!(text, "product equality residual {r:.3e}")?;
    }

    let diagnostics = json!({
        "qDep": cfg.q_dep,
        "lambda": lambda_for_params(&cfg.weyl).ok(),
        "rhsConstant": h_dep_const(d, cfg.q_dep)?,
        "optimizerFailures": report.optimizer_failures,
        "reruns": reruns,
        "productEqualityResidual": residual,
    });
    Ok(Outcome {
        rows,
        table,
        summary: Summary {
            min_gap: Some(report.min_gap),
            violations,
            diagnostics: Some(diagnostics),
            ..Summary::default()
        },
        text,
    })
}
